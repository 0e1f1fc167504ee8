//! Polynomial approximation of a continuous function on a closed interval.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::polynomial::Polynomial;
use super::smooth::Evaluate;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxScheme {
    #[default]
    Bernstein,
    /// Interpolation at the Chebyshev points of the first kind.
    Chebyshev,
}

pub fn approximate<G: Evaluate + ?Sized>(
    scheme: ApproxScheme,
    g: &G,
    interval: (f64, f64),
    degree: usize,
) -> Result<Polynomial> {
    match scheme {
        ApproxScheme::Bernstein => bernstein_approx(g, interval, degree),
        ApproxScheme::Chebyshev => chebyshev_approx(g, interval, degree),
    }
}

fn check_interval(interval: (f64, f64), degree: usize) -> Result<()> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid(format!("approximation interval [{a}, {b}] must be bounded with a < b")));
    }
    if degree == 0 {
        return Err(Error::invalid("approximation degree must be at least 1"));
    }
    Ok(())
}

/// Degree-`k` Bernstein polynomial of `g` on `[a, b]`, in the monomial basis of `x`.
///
/// `B_k(x) = Σ_i g(a + (b−a)i/k) C(k,i) t^i (1−t)^{k−i}` with `t = (x−a)/(b−a)`.
pub fn bernstein_approx<G: Evaluate + ?Sized>(
    g: &G,
    interval: (f64, f64),
    degree: usize,
) -> Result<Polynomial> {
    check_interval(interval, degree)?;
    let (a, b) = interval;
    let k = degree;
    let w = b - a;
    let samples: Vec<f64> = (0..=k).map(|i| g.eval(a + w * i as f64 / k as f64)).collect();
    if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("function is not finite at Bernstein node {bad}")));
    }
    // Exact conversion to the monomial basis of x; rounding happens once per coefficient.
    // coefficient of t^j: C(k,j) Σ_{i≤j} (−1)^{j−i} C(j,i) β_i
    let exact = |v: f64| BigRational::from_float(v).expect("finite");
    let beta: Vec<BigRational> = samples.iter().map(|&v| exact(v)).collect();
    let mut t_coeffs: Vec<BigRational> = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let mut acc = BigRational::zero();
        for (i, b) in beta.iter().enumerate().take(j + 1) {
            let term = b * BigRational::from_integer(binomial_big(j, i));
            if (j - i) % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        t_coeffs.push(acc * BigRational::from_integer(binomial_big(k, j)));
    }
    // t = (x − a)/w; Horner in the exact linear polynomial
    let (ea, ew) = (exact(a), exact(w));
    let lin = [-&ea / &ew, BigRational::one() / &ew];
    let mut acc: Vec<BigRational> = vec![BigRational::zero()];
    for c in t_coeffs.iter().rev() {
        let mut next = vec![BigRational::zero(); acc.len() + 1];
        for (m, v) in acc.iter().enumerate() {
            next[m] += v * &lin[0];
            next[m + 1] += v * &lin[1];
        }
        next[0] += c;
        acc = next;
    }
    Ok(Polynomial::new(acc.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()))
}

/// Degree-`k` interpolant of `g` at the `k + 1` Chebyshev points of `[a, b]`.
pub fn chebyshev_approx<G: Evaluate + ?Sized>(
    g: &G,
    interval: (f64, f64),
    degree: usize,
) -> Result<Polynomial> {
    check_interval(interval, degree)?;
    let (a, b) = interval;
    let n = degree + 1;
    let nodes: Vec<f64> = (0..n)
        .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())
        .collect();
    let values: Vec<f64> = nodes
        .iter()
        .map(|&s| g.eval(0.5 * (a + b) + 0.5 * (b - a) * s))
        .collect();
    // Chebyshev coefficients c_m = (2/n) Σ_j f_j T_m(s_j)
    let coeff: Vec<f64> = (0..n)
        .map(|m| {
            let c: f64 = (0..n)
                .map(|j| values[j] * (std::f64::consts::PI * m as f64 * (j as f64 + 0.5) / n as f64).cos())
                .sum();
            2.0 * c / n as f64
        })
        .collect();
    // Σ' c_m T_m(s) in the monomial basis of s via the three-term recurrence
    let mut t_prev = Polynomial::constant(1.0);
    let mut t_curr = Polynomial::monomial(1, 1.0);
    let mut acc = Polynomial::constant(0.5 * coeff[0]);
    for (m, &c) in coeff.iter().enumerate().skip(1) {
        if m > 1 {
            let next = Polynomial::monomial(1, 2.0).mul(&t_curr).sub(&t_prev);
            t_prev = t_curr;
            t_curr = next;
        }
        acc = acc.add(&t_curr.scale(c));
    }
    // s = (2x − a − b)/(b − a)
    Ok(acc.compose_affine(2.0 / (b - a), -(a + b) / (b - a)))
}

/// `max |g − p|` on an evenly spaced grid of `points` nodes over `[a, b]`.
pub fn grid_sup_error<G: Evaluate + ?Sized>(
    g: &G,
    p: &Polynomial,
    interval: (f64, f64),
    points: usize,
) -> f64 {
    let (a, b) = interval;
    (0..points)
        .map(|i| {
            let x = a + (b - a) * i as f64 / (points - 1) as f64;
            (g.eval(x) - p.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

fn binomial_big(n: usize, k: usize) -> BigInt {
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}
