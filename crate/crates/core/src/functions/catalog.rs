//! Named test functions referenced from experiment configs.

use super::polynomial::Polynomial;
use super::smooth::{SmoothFunction, TestFunction, Validity};

pub const CATALOG_NAMES: [&str; 6] = ["arctan", "tanh", "cube", "logistic", "identity", "square"];

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn lookup(name: &str) -> Option<SmoothFunction> {
    let f = match name {
        "arctan" => SmoothFunction::new(
            "arctan",
            f64::atan,
            |x: f64| 1.0 / (1.0 + x * x),
            Polynomial::constant(1.0),
            Validity::Global,
            true,
        ),
        "tanh" => SmoothFunction::new(
            "tanh",
            f64::tanh,
            |x: f64| {
                let t = x.tanh();
                1.0 - t * t
            },
            Polynomial::constant(1.0),
            Validity::Global,
            true,
        ),
        "cube" => SmoothFunction::new(
            "cube",
            |x: f64| x * x * x,
            |x: f64| 3.0 * x * x,
            Polynomial::new(vec![1.0, 0.0, 3.0]),
            Validity::Global,
            true,
        ),
        "logistic" => SmoothFunction::new(
            "logistic",
            logistic,
            |x: f64| {
                let s = logistic(x);
                s * (1.0 - s)
            },
            Polynomial::constant(0.25),
            Validity::Global,
            true,
        ),
        "identity" => SmoothFunction::new(
            "identity",
            |x: f64| x,
            |_| 1.0,
            Polynomial::constant(1.0),
            Validity::Global,
            true,
        ),
        "square" => SmoothFunction::new(
            "square",
            |x: f64| x * x,
            |x: f64| 2.0 * x,
            Polynomial::new(vec![1.0, 0.0, 1.0]),
            Validity::Global,
            false,
        ),
        _ => return None,
    };
    Some(f)
}

/// Every catalog entry.
pub fn catalog() -> Vec<SmoothFunction> {
    CATALOG_NAMES.iter().filter_map(|n| lookup(n)).collect()
}

/// Catalog entries that are exactly polynomials, returned in polynomial form.
pub fn polynomial_form(name: &str) -> Option<Polynomial> {
    match name {
        "cube" => Some(Polynomial::monomial(3, 1.0)),
        "identity" => Some(Polynomial::monomial(1, 1.0)),
        "square" => Some(Polynomial::monomial(2, 1.0)),
        _ => None,
    }
}

/// Resolves a name to a [`TestFunction`], preferring the exact polynomial form.
pub fn resolve(name: &str) -> Option<TestFunction> {
    polynomial_form(name)
        .map(TestFunction::Polynomial)
        .or_else(|| lookup(name).map(TestFunction::Smooth))
}
