//! Moments of the density-of-states measure and of the modified measures,
//! obtained from walk polynomials by independence of the site variables.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::walk::{moment_polynomial, Monomial, Volume, WalkPolynomial};
use crate::error::{Error, Result};
use crate::model::{enumerate_cube, SsdSpec};
use crate::parallel::CompensatedSum;

/// A moment with its exact rational value when the SSD admits one.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue {
    pub exact: Option<BigRational>,
    pub value: f64,
}

impl MomentValue {
    fn from_exact(q: BigRational) -> Self {
        let value = q.to_f64().unwrap_or(f64::NAN);
        Self { exact: Some(q), value }
    }

    /// Exact value as `num/den`, or the float when no exact value exists.
    pub fn exact_string(&self) -> String {
        match &self.exact {
            Some(q) => q.to_string(),
            None => format!("{}", self.value),
        }
    }
}

impl fmt::Display for MomentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.exact_string())
    }
}

/// `m_k = E⟨δ_n, H^k δ_n⟩` for an infinite-volume walk polynomial.
pub fn dos_moment(wp: &WalkPolynomial, ssd: &SsdSpec) -> Result<MomentValue> {
    require_infinite(wp)?;
    Ok(expectation(wp, ssd, None))
}

/// `m̄_k = ∫ x^k dν̄_p`: the base-site exponent `j₀` contributes
/// `E(ω^{2p+j₀})/(j₀+1)`, every other site `E(ω^{j})`.
pub fn modified_moment(wp: &WalkPolynomial, ssd: &SsdSpec, p: u32) -> Result<MomentValue> {
    require_infinite(wp)?;
    Ok(expectation(wp, ssd, Some(p)))
}

/// `m_{k,L} = |Λ_L|^{-1} Σ_n E⟨δ_n, H_L^k δ_n⟩`.
pub fn dos_moment_finite(dim: usize, k: usize, half_side: usize, ssd: &SsdSpec) -> Result<MomentValue> {
    finite_average(dim, k, half_side, ssd, None)
}

/// `∫ x^k dν̄_{p,L}`, the box average of the site-wise modified moments.
pub fn modified_moment_finite(
    dim: usize,
    k: usize,
    half_side: usize,
    ssd: &SsdSpec,
    p: u32,
) -> Result<MomentValue> {
    finite_average(dim, k, half_side, ssd, Some(p))
}

fn require_infinite(wp: &WalkPolynomial) -> Result<()> {
    if wp.volume() != Volume::Infinite {
        return Err(Error::invalid(format!(
            "expected an infinite-volume walk polynomial, got volume {}",
            wp.volume()
        )));
    }
    Ok(())
}

fn finite_average(
    dim: usize,
    k: usize,
    half_side: usize,
    ssd: &SsdSpec,
    p: Option<u32>,
) -> Result<MomentValue> {
    ssd.validate()?;
    let cube = enumerate_cube(dim, half_side)?;
    let values: Vec<MomentValue> = cube
        .sites()
        .iter()
        .map(|s| moment_polynomial(dim, k, s, Volume::Finite(half_side)).map(|wp| expectation(&wp, ssd, p)))
        .collect::<Result<_>>()?;
    let n = cube.len();
    if values.iter().all(|v| v.exact.is_some()) {
        let total: BigRational = values.into_iter().map(|v| v.exact.unwrap()).sum();
        Ok(MomentValue::from_exact(total / BigRational::from_integer(BigInt::from(n))))
    } else {
        let mut acc = CompensatedSum::new();
        for v in &values {
            acc.add(v.value);
        }
        Ok(MomentValue {
            exact: None,
            value: acc.value() / n as f64,
        })
    }
}

/// Exponents `(factor for the base site, factors for the others)` of one monomial.
fn split(wp: &WalkPolynomial, m: &Monomial) -> (u32, Vec<u32>) {
    let j0 = wp.base_exponent(m);
    let others = m.iter().filter(|(s, _)| s.as_slice() != wp.base()).map(|(_, j)| *j).collect();
    (j0, others)
}

fn expectation(wp: &WalkPolynomial, ssd: &SsdSpec, p: Option<u32>) -> MomentValue {
    let max_order = wp.k() as u32 + 2 * p.unwrap_or(0);
    let exact: Option<Vec<BigRational>> = (0..=max_order).map(|j| ssd.exact_moment(j)).collect();
    match exact {
        Some(mom) => {
            let mut total = BigRational::zero();
            for (m, &c) in wp.terms() {
                let (j0, others) = split(wp, m);
                let mut term = BigRational::from_integer(BigInt::from(c));
                for j in others {
                    term *= &mom[j as usize];
                }
                term *= match p {
                    None => mom[j0 as usize].clone(),
                    Some(p) => &mom[(2 * p + j0) as usize] / BigRational::from_integer(BigInt::from(j0 + 1)),
                };
                total += term;
            }
            MomentValue::from_exact(total)
        }
        None => {
            let mom: Vec<f64> = (0..=max_order).map(|j| ssd.moment(j)).collect();
            let mut acc = CompensatedSum::new();
            for (m, &c) in wp.terms() {
                let (j0, others) = split(wp, m);
                let mut term = c as f64;
                for j in others {
                    term *= mom[j as usize];
                }
                term *= match p {
                    None => mom[j0 as usize],
                    Some(p) => mom[(2 * p + j0) as usize] / (j0 + 1) as f64,
                };
                acc.add(term);
            }
            MomentValue {
                exact: None,
                value: acc.value(),
            }
        }
    }
}
