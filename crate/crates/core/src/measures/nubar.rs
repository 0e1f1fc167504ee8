//! Estimators of the modified measures `ν̄_{p,L}`:
//!
//! `∫ g dν̄_{p,L} = |Λ_L|^{-1} Σ_n ∫_0^1 E[ω_n^{2p} ⟨δ_n, g(H|_{ω_n→uω_n}) δ_n⟩] du`.
//!
//! The Monte Carlo estimators draw `u ~ Uniform[0,1]` per `(replicate, site)`
//! independently of the disorder; the exact finite-volume path goes through
//! walk polynomials.

use std::io::Write;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{Evaluate, Polynomial};
use crate::model::rng::{site_key, CounterStream, Purpose};
use crate::model::{assemble_hamiltonian, enumerate_cube, sample_disorder, LatticeCube, SsdSpec};
use crate::moments::{modified_moment_finite, MomentValue};
use crate::parallel::{pairwise_mean, try_ordered_map};
use crate::spectral::{diagonal_from_weights, site_weights};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateParams {
    pub d: usize,
    pub l: usize,
    pub p: u32,
    /// Moment order, when the integrand is `x^k`.
    pub k: Option<usize>,
    /// Integrand label otherwise.
    pub label: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub value: f64,
    /// Standard error from the scatter of the per-replicate means.
    pub std_error: f64,
    /// Number of replicates.
    pub n_samples: usize,
    pub estimator: String,
    pub params: EstimateParams,
}

/// Which sites enter each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SiteSampling {
    /// Every site of `Λ_L`.
    #[default]
    All,
    /// `m` sites drawn uniformly with replacement per replicate; unbiased for the site average.
    Random(usize),
}

/// Integrand handle shared across worker threads.
pub type Integrand<'a> = &'a (dyn Evaluate + Sync);

struct Sampler<'a> {
    cube: Arc<LatticeCube>,
    ssd: &'a SsdSpec,
    p: u32,
    seed: u64,
    sampling: SiteSampling,
}

impl Sampler<'_> {
    /// Per-integrand site averages of `ω_n^{2p} ⟨δ_n, g(H|_{ω_n→uω_n}) δ_n⟩` for one replicate.
    fn replicate_means(&self, r: usize, gs: &[Integrand<'_>]) -> Result<Vec<f64>> {
        let field = sample_disorder(self.ssd, self.cube.clone(), self.seed, r as u64)?;
        let h = assemble_hamiltonian(&self.cube, &field)?;
        let mut coupling = CounterStream::new(self.seed, r as u64, Purpose::Coupling);
        let sites: Vec<usize> = match self.sampling {
            SiteSampling::All => (0..self.cube.len()).collect(),
            SiteSampling::Random(m) => {
                let mut aux = CounterStream::new(self.seed, r as u64, Purpose::Auxiliary);
                (0..m)
                    .map(|j| ((aux.uniform(j as u64) * self.cube.len() as f64) as usize).min(self.cube.len() - 1))
                    .collect()
            }
        };
        let mut per_g: Vec<Vec<f64>> = vec![Vec::with_capacity(sites.len()); gs.len()];
        for &n in &sites {
            let u = coupling.uniform(site_key(self.cube.site(n)));
            let weight = h.matrix().get(n, n).powi(2 * self.p as i32);
            let scaled = h.scale_site(n, u);
            let sw = site_weights(scaled.matrix(), &[n])?;
            for (g, out) in gs.iter().zip(per_g.iter_mut()) {
                out.push(weight * diagonal_from_weights(&sw.eigenvalues, &sw.weights[0], *g));
            }
        }
        Ok(per_g.iter().map(|v| pairwise_mean(v)).collect())
    }

    fn run(&self, replicates: usize, gs: &[Integrand<'_>]) -> Result<Vec<(f64, f64)>> {
        if replicates < 2 {
            return Err(Error::invalid("at least two replicates are needed for a standard error"));
        }
        if let SiteSampling::Random(0) = self.sampling {
            return Err(Error::invalid("site sampling needs at least one site per replicate"));
        }
        let means = try_ordered_map(replicates, |r| {
            self.replicate_means(r, gs).map_err(|e| e.in_replicate(r as u64))
        })?;
        Ok((0..gs.len())
            .map(|i| {
                let col: Vec<f64> = means.iter().map(|m| m[i]).collect();
                mean_and_se(&col)
            })
            .collect())
    }
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_mean(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = crate::parallel::pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of `∫ x^k dν̄_{p,L}`.
pub fn nubar_moment_mc(
    dim: usize,
    half_side: usize,
    ssd: &SsdSpec,
    p: u32,
    k: usize,
    replicates: usize,
    master_seed: u64,
) -> Result<MeasureEstimate> {
    let cube = Arc::new(enumerate_cube(dim, half_side)?);
    let sampler = Sampler {
        cube,
        ssd,
        p,
        seed: master_seed,
        sampling: SiteSampling::All,
    };
    let mono = |x: f64| x.powi(k as i32);
    let (value, std_error) = sampler.run(replicates, &[&mono])?[0];
    Ok(MeasureEstimate {
        value,
        std_error,
        n_samples: replicates,
        estimator: "nubar_moment_mc".into(),
        params: EstimateParams {
            d: dim,
            l: half_side,
            p,
            k: Some(k),
            label: None,
            seed: master_seed,
        },
    })
}

/// Exact `∫ x^k dν̄_{p,L}` for a two-point SSD.
pub fn nubar_moment_exact_finite(
    dim: usize,
    half_side: usize,
    ssd: &SsdSpec,
    p: u32,
    k: usize,
) -> Result<MomentValue> {
    if !matches!(ssd, SsdSpec::TwoPoint { .. }) {
        return Err(Error::invalid(format!("exact finite-volume moments need a two-point SSD, got {ssd}")));
    }
    modified_moment_finite(dim, k, half_side, ssd, p)
}

/// Exact `∫ |P|² dν̄_{p,L}` from the finite-volume moments of `ν̄_{p,L}`.
///
/// The coefficients of `P` are taken at their exact binary values.
pub fn polynomial_norm_exact_finite(
    poly: &Polynomial,
    dim: usize,
    half_side: usize,
    ssd: &SsdSpec,
    p: u32,
) -> Result<MomentValue> {
    let sq = poly.to_exact();
    let mut prod = vec![BigRational::zero(); 2 * sq.len() - 1];
    for (i, a) in sq.iter().enumerate() {
        for (j, b) in sq.iter().enumerate() {
            prod[i + j] += a * b;
        }
    }
    let mut exact = Some(BigRational::zero());
    let mut float = 0.0;
    for (k, c) in prod.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let m = modified_moment_finite(dim, k, half_side, ssd, p)?;
        float += c.to_f64().unwrap_or(f64::NAN) * m.value;
        exact = match (exact, m.exact) {
            (Some(acc), Some(q)) => Some(acc + c * q),
            _ => None,
        };
    }
    Ok(match exact {
        Some(q) => {
            let value = q.to_f64().unwrap_or(f64::NAN);
            MomentValue { exact: Some(q), value }
        }
        None => MomentValue { exact: None, value: float },
    })
}

/// Monte Carlo estimate of `∫ |f′|² dν̄_{1,L}`, the norm in the finite-volume variance bound.
pub fn fprime_norm_estimate<G: Evaluate + Sync>(
    fprime: &G,
    label: &str,
    dim: usize,
    half_side: usize,
    ssd: &SsdSpec,
    replicates: usize,
    master_seed: u64,
) -> Result<MeasureEstimate> {
    let mut out = fprime_norm_estimates(&[(fprime, label)], dim, half_side, ssd, replicates, master_seed, SiteSampling::All)?;
    Ok(out.remove(0))
}

/// `∫ |g|² dν̄_{1,L}` for several integrands `g` from the same draws of `(ω, u)`.
pub fn fprime_norm_estimates(
    integrands: &[(Integrand<'_>, &str)],
    dim: usize,
    half_side: usize,
    ssd: &SsdSpec,
    replicates: usize,
    master_seed: u64,
    sampling: SiteSampling,
) -> Result<Vec<MeasureEstimate>> {
    let cube = Arc::new(enumerate_cube(dim, half_side)?);
    let sampler = Sampler {
        cube,
        ssd,
        p: 1,
        seed: master_seed,
        sampling,
    };
    let squares: Vec<Box<dyn Fn(f64) -> f64 + Sync + '_>> = integrands
        .iter()
        .map(|(g, _)| {
            let g = *g;
            Box::new(move |x: f64| {
                let v = g.eval(x);
                v * v
            }) as Box<dyn Fn(f64) -> f64 + Sync>
        })
        .collect();
    let refs: Vec<Integrand<'_>> = squares.iter().map(|b| b as Integrand<'_>).collect();
    let stats = sampler.run(replicates, &refs)?;
    Ok(integrands
        .iter()
        .zip(stats)
        .map(|((_, label), (value, std_error))| MeasureEstimate {
            value,
            std_error,
            n_samples: replicates,
            estimator: "fprime_norm_estimate".into(),
            params: EstimateParams {
                d: dim,
                l: half_side,
                p: 1,
                k: None,
                label: Some(label.to_string()),
                seed: master_seed,
            },
        })
        .collect())
}

/// CSV with header `estimator,d,L,p,k,value,std_error,seed`.
pub fn write_estimates_csv<W: Write>(rows: &[MeasureEstimate], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::invalid(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["estimator", "d", "L", "p", "k", "value", "std_error", "seed"]).map_err(io)?;
    for r in rows {
        let k = match (&r.params.k, &r.params.label) {
            (Some(k), _) => k.to_string(),
            (None, Some(l)) => l.clone(),
            (None, None) => String::new(),
        };
        w.write_record([
            r.estimator.clone(),
            r.params.d.to_string(),
            r.params.l.to_string(),
            r.params.p.to_string(),
            k,
            format!("{:e}", r.value),
            format!("{:e}", r.std_error),
            r.params.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::One;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn total_mass_estimates() {
        let r = SsdSpec::rademacher();
        // ω² ≡ 1, so the k = 0 estimate is exact
        let e = nubar_moment_mc(1, 3, &r, 1, 0, 4, 1).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12 && e.std_error < 1e-12);
        let u = SsdSpec::Uniform { lo: -1.0, hi: 1.0 };
        let e = nubar_moment_mc(1, 4, &u, 1, 0, 40, 2).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() <= 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn second_moment_matches_exact_finite_value() {
        let r = SsdSpec::rademacher();
        let exact = nubar_moment_exact_finite(1, 10, &r, 1, 2).unwrap();
        assert_eq!(exact.exact.clone().unwrap(), rational(7, 3) - rational(2, 21));
        let e = nubar_moment_mc(1, 10, &r, 1, 2, 30, 9).unwrap();
        assert!((e.value - exact.value).abs() <= 3.0 * e.std_error.max(1e-12), "{e:?} vs {}", exact.value);
    }

    #[test]
    fn exact_small_cases() {
        let r = SsdSpec::rademacher();
        assert_eq!(nubar_moment_exact_finite(1, 1, &r, 1, 0).unwrap().exact, Some(BigRational::one()));
        assert!(nubar_moment_exact_finite(1, 1, &SsdSpec::Uniform { lo: 0.0, hi: 1.0 }, 1, 0).is_err());
        let l2 = nubar_moment_exact_finite(1, 2, &r, 1, 2).unwrap().exact.unwrap();
        assert_eq!(l2, rational(7, 3) - rational(2, 5));
    }

    #[test]
    fn fprime_norm_examples() {
        let r = SsdSpec::rademacher();
        let one = fprime_norm_estimate(&|_| 1.0, "one", 1, 5, &r, 5, 4).unwrap();
        assert!((one.value - 1.0).abs() < 1e-10);

        let lin = fprime_norm_estimate(&|x: f64| x, "x", 1, 6, &r, 40, 4).unwrap();
        let exact = nubar_moment_exact_finite(1, 6, &r, 1, 2).unwrap().value;
        assert!((lin.value - exact).abs() <= 3.0 * lin.std_error, "{lin:?} vs {exact}");

        let at = fprime_norm_estimate(&|x: f64| 1.0 / (1.0 + x * x), "arctan'", 1, 6, &r, 10, 4).unwrap();
        assert!(at.value <= 1.0 * (1.0 + 3.0 * at.std_error));
    }

    #[test]
    fn site_subsampling_is_consistent() {
        let r = SsdSpec::rademacher();
        let all = fprime_norm_estimate(&|x: f64| x, "x", 1, 8, &r, 40, 11).unwrap();
        let id = |x: f64| x;
        let sub = fprime_norm_estimates(&[(&id, "x")], 1, 8, &r, 200, 11, SiteSampling::Random(4))
            .unwrap()
            .remove(0);
        let exact = nubar_moment_exact_finite(1, 8, &r, 1, 2).unwrap().value;
        assert!((sub.value - exact).abs() <= 3.5 * sub.std_error);
        assert!((all.value - exact).abs() <= 3.5 * all.std_error);
    }

    #[test]
    fn polynomial_norm_expands_into_moments() {
        let r = SsdSpec::rademacher();
        // |2x − 1|² = 4x² − 4x + 1
        let p = Polynomial::new(vec![-1.0, 2.0]);
        let n = polynomial_norm_exact_finite(&p, 1, 2, &r, 1).unwrap().exact.unwrap();
        let m = |k| modified_moment_finite(1, k, 2, &r, 1).unwrap().exact.unwrap();
        let expected = m(2) * rational(4, 1) - m(1) * rational(4, 1) + m(0);
        assert_eq!(n, expected);
    }

    #[test]
    fn csv_columns() {
        let e = nubar_moment_mc(1, 1, &SsdSpec::rademacher(), 1, 0, 2, 0).unwrap();
        let mut buf = Vec::new();
        write_estimates_csv(&[e], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("estimator,d,L,p,k,value,std_error,seed\nnubar_moment_mc,1,1,1,0,"));
    }
}

#[cfg(test)]
mod shared_draws {
    use super::*;

    #[test]
    fn batch_matches_single_estimates() {
        let r = SsdSpec::rademacher();
        let a = |x: f64| x;
        let b = |x: f64| 1.0 / (1.0 + x * x);
        let batch = fprime_norm_estimates(&[(&a, "x"), (&b, "lorentz")], 1, 4, &r, 6, 2, SiteSampling::All).unwrap();
        let single = fprime_norm_estimate(&b, "lorentz", 1, 4, &r, 6, 2).unwrap();
        assert_eq!(batch[1], single);
        assert_eq!(batch[0].params.label.as_deref(), Some("x"));
    }
}
