//! Variance estimation, normality diagnostics, the variance upper bound and
//! the positivity verdict for sampled statistics.

use serde::Serialize;

use super::sampling::SampleSet;
use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::measures::MeasureEstimate;
use crate::model::{spectrum_support, SpectrumSupport};
use crate::parallel::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityThresholds {
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Bound on `KS·√R`.
    pub ks_scaled: f64,
}

impl NormalityThresholds {
    /// `3√(6/R)`, `3√(24/R)` and `1.95`.
    pub fn for_replicates(r: usize) -> Self {
        let r = r as f64;
        Self {
            skewness: 3.0 * (6.0 / r).sqrt(),
            excess_kurtosis: 3.0 * (24.0 / r).sqrt(),
            ks_scaled: 1.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub sigma2_hat: f64,
    /// `√((m₄ − σ̂⁴)/R)`.
    pub std_error: f64,
    pub bound_rhs: Option<f64>,
    pub bound_rhs_se: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub ks_statistic: Option<f64>,
    /// `σ̂ = 0`: the limit is the point mass at zero rather than a Gaussian.
    pub degenerate: bool,
    pub replicates: usize,
}

impl VarianceReport {
    pub fn ks_scaled(&self) -> Option<f64> {
        self.ks_statistic.map(|d| d * (self.replicates as f64).sqrt())
    }

    /// `None` before [`normality_test`] ran or in the degenerate case.
    pub fn normality_passes(&self) -> Option<bool> {
        let t = NormalityThresholds::for_replicates(self.replicates);
        Some(
            self.skewness?.abs() <= t.skewness
                && self.excess_kurtosis?.abs() <= t.excess_kurtosis
                && self.ks_scaled()? <= t.ks_scaled,
        )
    }
}

fn raw_variance(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let sq: Vec<f64> = values.iter().map(|x| x * x).collect();
    let quart: Vec<f64> = sq.iter().map(|x| x * x).collect();
    let s2 = pairwise_sum(&sq) / (r - 1.0);
    let m4 = pairwise_sum(&quart) / r;
    let se = ((m4 - s2 * s2).max(0.0) / r).sqrt();
    (s2, se)
}

/// `σ̂² = Σ X_r² / (R − 1)` and its standard error.
pub fn variance_estimate(s: &SampleSet) -> Result<VarianceReport> {
    if s.len() < 8 {
        return Err(Error::invalid(format!("variance estimate needs R ≥ 8, got {}", s.len())));
    }
    let (sigma2_hat, std_error) = raw_variance(&s.values);
    Ok(VarianceReport {
        sigma2_hat,
        std_error,
        bound_rhs: None,
        bound_rhs_se: None,
        skewness: None,
        excess_kurtosis: None,
        ks_statistic: None,
        degenerate: sigma2_hat == 0.0,
        replicates: s.len(),
    })
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov distance to the standard normal.
pub fn ks_normal(samples: &[f64]) -> f64 {
    let mut z = samples.to_vec();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// `(skewness, excess kurtosis)` from central sample moments.
pub fn shape_statistics(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let c: Vec<f64> = values.iter().map(|x| x - mean).collect();
    let moment = |k: i32| pairwise_sum(&c.iter().map(|x| x.powi(k)).collect::<Vec<_>>()) / n;
    let (m2, m3, m4) = (moment(2), moment(3), moment(4));
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Completes the variance report with skewness, excess kurtosis and the KS
/// distance of `X/σ̂`; constant samples take the degenerate branch.
pub fn normality_test(s: &SampleSet) -> Result<VarianceReport> {
    if s.len() < 200 {
        return Err(Error::invalid(format!("normality test needs R ≥ 200, got {}", s.len())));
    }
    let mut rep = variance_estimate(s)?;
    if rep.degenerate {
        return Ok(rep);
    }
    let sigma = rep.sigma2_hat.sqrt();
    let z: Vec<f64> = s.values.iter().map(|x| x / sigma).collect();
    let (skew, kurt) = shape_statistics(&z);
    rep.skewness = Some(skew);
    rep.excess_kurtosis = Some(kurt);
    rep.ks_statistic = Some(ks_normal(&z));
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBoundCheck {
    pub lhs: f64,
    pub lhs_se: f64,
    /// `8 ∫|f′|² dν̄_L`.
    pub rhs: f64,
    pub rhs_se: f64,
    pub combined_se: f64,
    /// `rhs + 3·combined_se − lhs`.
    pub margin: f64,
    pub passes: bool,
}

/// `σ̂² ≤ 8·∫|f′|² dν̄_L + 3·combined SE`.
pub fn variance_bound_check(s: &SampleSet, norm: &MeasureEstimate) -> Result<(VarianceReport, VarianceBoundCheck)> {
    if norm.params.d != s.meta.d || norm.params.l != s.meta.l || norm.params.p != 1 {
        return Err(Error::invalid(format!(
            "norm estimate at (d={}, L={}, p={}) does not match samples at (d={}, L={})",
            norm.params.d, norm.params.l, norm.params.p, s.meta.d, s.meta.l
        )));
    }
    let mut rep = variance_estimate(s)?;
    let rhs = 8.0 * norm.value;
    let rhs_se = 8.0 * norm.std_error;
    rep.bound_rhs = Some(rhs);
    rep.bound_rhs_se = Some(rhs_se);
    let combined_se = rep.std_error.hypot(rhs_se);
    let margin = rhs + 3.0 * combined_se - rep.sigma2_hat;
    let check = VarianceBoundCheck {
        lhs: rep.sigma2_hat,
        lhs_se: rep.std_error,
        rhs,
        rhs_se,
        combined_se,
        margin,
        passes: margin >= 0.0,
    };
    Ok((rep, check))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositivityVerdict {
    /// `σ̂² > 5·SE`.
    Positive,
    /// `0 < σ̂² ≤ 5·SE`.
    Inconclusive,
    /// `σ̂² = 0` exactly.
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub verdict: PositivityVerdict,
    pub sigma2_hat: f64,
    pub std_error: f64,
    /// Whether `f` is declared strictly monotone, the case in which positivity is expected.
    pub monotone: bool,
}

/// Statistical positivity of `σ²_f`. `interval` is the declared open interval
/// of monotonicity; it must contain the spectral hull of `H`.
pub fn positivity_check(s: &SampleSet, f: &TestFunction, interval: (f64, f64)) -> Result<PositivityReport> {
    let (a, b) = interval;
    let covers = match spectrum_support(&s.meta.ssd, s.meta.d) {
        SpectrumSupport::Interval(lo, hi) => a < lo && hi < b,
        SpectrumSupport::Unbounded => a == f64::NEG_INFINITY && b == f64::INFINITY,
    };
    if !covers {
        return Err(Error::Refused(format!(
            "declared interval ({a}, {b}) does not contain the spectrum of H for {}",
            s.meta.ssd
        )));
    }
    let rep = variance_estimate(s)?;
    let verdict = if rep.sigma2_hat == 0.0 {
        PositivityVerdict::ZeroVariance
    } else if rep.sigma2_hat > 5.0 * rep.std_error {
        PositivityVerdict::Positive
    } else {
        PositivityVerdict::Inconclusive
    };
    Ok(PositivityReport {
        verdict,
        sigma2_hat: rep.sigma2_hat,
        std_error: rep.std_error,
        monotone: f.is_monotone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clt::sampling::{sample_x, SampleMeta};
    use crate::functions::catalog::lookup;
    use crate::functions::Polynomial;
    use crate::model::rng::{CounterStream, Purpose};
    use crate::model::SsdSpec;

    fn synthetic(values: Vec<f64>) -> SampleSet {
        SampleSet {
            traces: values.clone(),
            meta: SampleMeta {
                d: 1,
                l: 0,
                label: "synthetic".into(),
                ssd: SsdSpec::rademacher(),
                replicates: values.len(),
                seed: 0,
            },
            values,
            centered: true,
        }
    }

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut s = CounterStream::new(seed, 0, Purpose::Synthetic);
        (0..n)
            .map(|i| {
                let [u1, u2] = s.uniforms(i as u64);
                SsdSpec::Gaussian { mean: 0.0, std: 1.0 }.sample_from_uniforms(u1, u2)
            })
            .collect()
    }

    #[test]
    fn zero_samples() {
        let rep = variance_estimate(&synthetic(vec![0.0; 10])).unwrap();
        assert_eq!((rep.sigma2_hat, rep.std_error), (0.0, 0.0));
        let rep = normality_test(&synthetic(vec![0.0; 300])).unwrap();
        assert!(rep.degenerate && rep.normality_passes().is_none());
    }

    #[test]
    fn scaling_quadruples_variance() {
        let v = normals(100, 1);
        let a = variance_estimate(&synthetic(v.clone())).unwrap();
        let b = variance_estimate(&synthetic(v.iter().map(|x| 2.0 * x).collect())).unwrap();
        assert_eq!(b.sigma2_hat, 4.0 * a.sigma2_hat);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        // midpoint quantiles have KS distance exactly 1/(2n)
        let n = 400;
        let q: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                // bisection inverse of the normal CDF
                let (mut lo, mut hi) = (-10.0, 10.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < p {
                        lo = mid
                    } else {
                        hi = mid
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        assert!((ks_normal(&q) - 0.5 / n as f64).abs() < 1e-9);
    }

    #[test]
    fn synthetic_normals_pass_ks_in_most_seeds() {
        let r = 5000;
        let passes = (0..40)
            .filter(|&seed| ks_normal(&normals(r, seed)) * (r as f64).sqrt() <= 1.95)
            .count();
        assert!(passes >= 38, "{passes}/40");
    }

    #[test]
    fn site_sum_variance_and_normality() {
        let r = SsdSpec::rademacher();
        let x = TestFunction::Polynomial(Polynomial::monomial(1, 1.0));
        let s = sample_x(1, 100, &r, &x, 2000, 4).unwrap();
        let rep = normality_test(&s).unwrap();
        assert!((rep.sigma2_hat - 1.0).abs() <= 4.0 * rep.std_error, "{rep:?}");

        let u = SsdSpec::Uniform { lo: -1.0, hi: 1.0 };
        let s = sample_x(1, 500, &u, &x, 2000, 8).unwrap();
        let rep = normality_test(&s).unwrap();
        assert!(rep.skewness.unwrap().abs() <= 3.0 * (6.0f64 / 2000.0).sqrt());
    }

    #[test]
    fn positivity_verdicts() {
        let r = SsdSpec::rademacher();
        let cube = TestFunction::Polynomial(Polynomial::monomial(3, 1.0));
        let s = sample_x(1, 30, &r, &cube, 200, 1).unwrap();
        let rep = positivity_check(&s, &cube, (-4.0, 4.0)).unwrap();
        assert_eq!(rep.verdict, PositivityVerdict::Positive);
        assert!(rep.monotone);
        assert!(matches!(positivity_check(&s, &cube, (-2.0, 2.0)), Err(Error::Refused(_))));

        let sq = TestFunction::Polynomial(Polynomial::monomial(2, 1.0));
        let s = sample_x(1, 30, &r, &sq, 50, 1).unwrap();
        let rep = positivity_check(&s, &sq, (-4.0, 4.0)).unwrap();
        assert_eq!(rep.verdict, PositivityVerdict::ZeroVariance);
        assert!(!rep.monotone);

        let g = SsdSpec::Gaussian { mean: 0.0, std: 1.0 };
        let at = TestFunction::Smooth(lookup("arctan").unwrap());
        let s = sample_x(1, 5, &g, &at, 20, 1).unwrap();
        assert!(positivity_check(&s, &at, (-100.0, 100.0)).is_err());
        assert!(positivity_check(&s, &at, (f64::NEG_INFINITY, f64::INFINITY)).is_ok());
    }
}
