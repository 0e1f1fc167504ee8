use std::fmt;
use std::sync::Arc;

use super::polynomial::Polynomial;
use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Anything that can be evaluated pointwise on the real line.
pub trait Evaluate {
    fn eval(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Evaluate for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

impl Evaluate for Polynomial {
    fn eval(&self, x: f64) -> f64 {
        Polynomial::eval(self, x)
    }
}

/// Where a growth certificate or monotonicity claim holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validity {
    Global,
    Interval(f64, f64),
}

impl Validity {
    /// Grid range used for checks; global claims are probed on `[−10, 10]`.
    pub fn grid_range(&self) -> (f64, f64) {
        match *self {
            Validity::Global => (-10.0, 10.0),
            Validity::Interval(a, b) => (a, b),
        }
    }
}

/// A `C¹` test function `f` with derivative `f′` and a polynomial `P` with `|f′| ≤ P`.
#[derive(Clone)]
pub struct SmoothFunction {
    label: String,
    f: RealFn,
    fprime: RealFn,
    growth: Polynomial,
    validity: Validity,
    monotone: bool,
}

impl fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("label", &self.label)
            .field("growth", &self.growth)
            .field("validity", &self.validity)
            .field("monotone", &self.monotone)
            .finish()
    }
}

/// Outcome of the grid validation of a [`SmoothFunction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridReport {
    /// `max (|f′| − P)` over the grid; nonpositive when the certificate holds.
    pub growth_excess: f64,
    /// `max |central difference − f′| / (1 + |f′|)`.
    pub derivative_error: f64,
}

impl GridReport {
    pub fn passes(&self) -> bool {
        self.growth_excess <= 0.0 && self.derivative_error <= 1e-5
    }
}

impl SmoothFunction {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fprime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth: Polynomial,
        validity: Validity,
        monotone: bool,
    ) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
            fprime: Arc::new(fprime),
            growth,
            validity,
            monotone,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.fprime)(x)
    }

    pub fn fprime(&self) -> RealFn {
        Arc::clone(&self.fprime)
    }

    pub fn growth(&self) -> &Polynomial {
        &self.growth
    }

    pub fn validity(&self) -> Validity {
        self.validity
    }

    /// Strictly monotone on the validity range.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Checks the growth certificate and `f′` against central differences
    /// (`h = 10⁻⁴`) on a 1000-point grid.
    pub fn grid_check(&self) -> GridReport {
        let (a, b) = self.validity.grid_range();
        let h = 1e-4;
        let mut growth_excess = f64::NEG_INFINITY;
        let mut derivative_error: f64 = 0.0;
        for i in 0..1000 {
            let x = a + (b - a) * i as f64 / 999.0;
            let fp = self.derivative(x);
            growth_excess = growth_excess.max(fp.abs() - self.growth.eval(x));
            let cd = (self.value(x + h) - self.value(x - h)) / (2.0 * h);
            derivative_error = derivative_error.max((cd - fp).abs() / (1.0 + fp.abs()));
        }
        GridReport {
            growth_excess,
            derivative_error,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.grid_check();
        if r.passes() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "test function '{}' fails its grid check: growth excess {:.3e}, derivative error {:.3e}",
                self.label, r.growth_excess, r.derivative_error
            )))
        }
    }
}

/// A test function for the trace statistic: a polynomial or a smooth `C¹_P` function.
#[derive(Debug, Clone)]
pub enum TestFunction {
    Polynomial(Polynomial),
    Smooth(SmoothFunction),
}

impl TestFunction {
    pub fn label(&self) -> String {
        match self {
            TestFunction::Polynomial(p) => format!("poly[{p}]"),
            TestFunction::Smooth(s) => s.label().to_string(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            TestFunction::Polynomial(p) => p.eval(x),
            TestFunction::Smooth(s) => s.value(x),
        }
    }

    pub fn derivative_value(&self, x: f64) -> f64 {
        match self {
            TestFunction::Polynomial(p) => p.derivative().eval(x),
            TestFunction::Smooth(s) => s.derivative(x),
        }
    }

    /// `f′` as an evaluable object.
    pub fn derivative(&self) -> RealFn {
        match self {
            TestFunction::Polynomial(p) => {
                let d = p.derivative();
                Arc::new(move |x| d.eval(x))
            }
            TestFunction::Smooth(s) => s.fprime(),
        }
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            TestFunction::Polynomial(p) => Some(p),
            TestFunction::Smooth(_) => None,
        }
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            TestFunction::Polynomial(p) => {
                // odd-degree monomials and affine maps with nonzero slope
                let c = p.coeffs();
                p.degree() >= 1
                    && p.degree() % 2 == 1
                    && c[1..p.degree()].iter().all(|&v| v == 0.0)
            }
            TestFunction::Smooth(s) => s.is_monotone(),
        }
    }

    /// `f + c`.
    pub fn plus_constant(&self, c: f64) -> Self {
        match self {
            TestFunction::Polynomial(p) => TestFunction::Polynomial(p.add(&Polynomial::constant(c))),
            TestFunction::Smooth(s) => {
                let (f, fp) = (Arc::clone(&s.f), Arc::clone(&s.fprime));
                TestFunction::Smooth(SmoothFunction {
                    label: format!("{}+{c}", s.label),
                    f: Arc::new(move |x| f(x) + c),
                    fprime: fp,
                    ..s.clone()
                })
            }
        }
    }

    /// `α·f`.
    pub fn scaled(&self, alpha: f64) -> Self {
        match self {
            TestFunction::Polynomial(p) => TestFunction::Polynomial(p.scale(alpha)),
            TestFunction::Smooth(s) => {
                let (f, fp) = (Arc::clone(&s.f), Arc::clone(&s.fprime));
                TestFunction::Smooth(SmoothFunction {
                    label: format!("{alpha}*{}", s.label),
                    f: Arc::new(move |x| alpha * f(x)),
                    fprime: Arc::new(move |x| alpha * fp(x)),
                    growth: s.growth.scale(alpha.abs()),
                    ..s.clone()
                })
            }
        }
    }
}

impl Evaluate for TestFunction {
    fn eval(&self, x: f64) -> f64 {
        self.value(x)
    }
}

impl From<Polynomial> for TestFunction {
    fn from(p: Polynomial) -> Self {
        TestFunction::Polynomial(p)
    }
}

impl From<SmoothFunction> for TestFunction {
    fn from(s: SmoothFunction) -> Self {
        TestFunction::Smooth(s)
    }
}
