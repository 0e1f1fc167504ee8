//! `Tr P(H_L)` for a polynomial `P` as an explicit polynomial in the box variables.
//!
//! Summing the finite-volume walk polynomials over all base sites gives
//! `Tr P(H_L) = Σ_mono c_mono Π ω_s^{j_s}`. Evaluating this form is exact
//! whenever the coefficients and site values are small integers, which makes
//! deterministic traces (e.g. `Tr H²` under `ω² ≡ 1`) come out bit-identical.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::functions::Polynomial;
use crate::model::LatticeCube;
use crate::moments::{moment_polynomial, Volume};
use crate::parallel::CompensatedSum;

/// Largest `(2d+1)^deg · |Λ|` for which the walk form is built.
pub const TRACE_WALK_BUDGET: u128 = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TracePolynomial {
    /// `(site index, exponent)` lists with their real coefficients, in canonical order.
    terms: Vec<(Vec<(usize, u32)>, f64)>,
}

impl TracePolynomial {
    /// `None` when the expansion would exceed [`TRACE_WALK_BUDGET`].
    pub fn build(cube: &LatticeCube, poly: &Polynomial) -> Result<Option<Self>> {
        let d = cube.dim() as u128;
        let deg = poly.degree() as u32;
        let cost = (2 * d + 1).checked_pow(deg).and_then(|s| s.checked_mul(cube.len() as u128));
        if cost.is_none_or(|c| c > TRACE_WALK_BUDGET) {
            return Ok(None);
        }
        let mut acc: BTreeMap<Vec<(usize, u32)>, f64> = BTreeMap::new();
        for (m, &a) in poly.coeffs().iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for site in cube.sites() {
                let wp = moment_polynomial(cube.dim(), m, site, Volume::Finite(cube.half_side()))?;
                for (mono, &c) in wp.terms() {
                    let key: Vec<(usize, u32)> = mono
                        .iter()
                        .map(|(s, j)| (cube.index_of(s).expect("walk stays in the cube"), *j))
                        .collect();
                    *acc.entry(key).or_insert(0.0) += a * c as f64;
                }
            }
        }
        Ok(Some(Self {
            terms: acc.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at the potential `values[i] = ω_{site i}`.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        let mut acc = CompensatedSum::new();
        for (mono, c) in &self.terms {
            let prod: f64 = mono.iter().map(|&(i, j)| values[i].powi(j as i32)).product();
            acc.add(c * prod);
        }
        acc.value()
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::{assemble_hamiltonian, enumerate_cube, sample_disorder, SsdSpec};
    use crate::spectral::{eigenvalues, trace_of};

    #[test]
    fn agrees_with_spectral_trace() {
        let p = Polynomial::new(vec![0.5, -1.0, 2.0, 1.0, -0.25]);
        for (d, l) in [(1usize, 6usize), (2, 2)] {
            let c = Arc::new(enumerate_cube(d, l).unwrap());
            let tp = TracePolynomial::build(&c, &p).unwrap().unwrap();
            for seed in 0..3 {
                let f = sample_disorder(&SsdSpec::Gaussian { mean: 0.2, std: 1.0 }, c.clone(), seed, 0).unwrap();
                let h = assemble_hamiltonian(&c, &f).unwrap();
                let spectral = trace_of(&eigenvalues(h.matrix()).unwrap(), &p);
                let walk = tp.evaluate(f.values());
                assert!((spectral - walk).abs() < 1e-9 * (1.0 + walk.abs()));
            }
        }
    }

    #[test]
    fn square_trace_is_exact_under_rademacher() {
        let c = Arc::new(enumerate_cube(1, 50).unwrap());
        let tp = TracePolynomial::build(&c, &Polynomial::monomial(2, 1.0)).unwrap().unwrap();
        let expected = (c.len() + 2 * c.edge_count()) as f64;
        for seed in 0..5 {
            let f = sample_disorder(&SsdSpec::rademacher(), c.clone(), seed, 0).unwrap();
            assert_eq!(tp.evaluate(f.values()), expected);
        }
    }

    #[test]
    fn over_budget_returns_none() {
        let c = enumerate_cube(3, 5).unwrap();
        assert!(TracePolynomial::build(&c, &Polynomial::monomial(12, 1.0)).unwrap().is_none());
    }
}
