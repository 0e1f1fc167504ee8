//! Variance scans along a grid of volumes and the polynomial-approximation
//! inequality `|σ_{Q_k} − σ_f| ≤ √8 ‖f′ − P_k‖_{L²(ν̄_L)}`.

use serde::Serialize;

use super::sampling::{sample_many, sample_x};
use super::stats::{variance_estimate, VarianceReport};
use crate::error::{Error, Result};
use crate::functions::{approximate, ApproxScheme, Polynomial, SmoothFunction, TestFunction};
use crate::measures::{fprime_norm_estimates, Integrand, MeasureEstimate, SiteSampling};
use crate::model::SsdSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub l: usize,
    pub report: VarianceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialScan {
    pub rows: Vec<ScanRow>,
    /// Last two grid points agree within three combined standard errors.
    pub stabilized: bool,
}

/// `σ̂²_{P,L}` for each `L` in `grid`.
pub fn polynomial_variance_scan(
    poly: &Polynomial,
    dim: usize,
    ssd: &SsdSpec,
    grid: &[usize],
    replicates: usize,
    master_seed: u64,
) -> Result<PolynomialScan> {
    if poly.degree() < 1 {
        return Err(Error::invalid("variance scan needs a polynomial of degree ≥ 1"));
    }
    let f = TestFunction::Polynomial(poly.clone());
    let rows = grid
        .iter()
        .map(|&l| {
            let s = sample_x(dim, l, ssd, &f, replicates, master_seed)?;
            Ok(ScanRow {
                l,
                report: variance_estimate(&s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stabilized = match rows.as_slice() {
        [.., a, b] => {
            let (a, b) = (&a.report, &b.report);
            (a.sigma2_hat - b.sigma2_hat).abs() <= 3.0 * a.std_error.hypot(b.std_error)
        }
        _ => true,
    };
    Ok(PolynomialScan { rows, stabilized })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxRow {
    pub degree: usize,
    pub sigma_q: f64,
    pub sigma_f: f64,
    /// `√(∫|f′ − P_k|² dν̄_L)` estimate.
    pub norm: f64,
    pub norm_se: f64,
    /// `√8 · norm`.
    pub bound: f64,
    pub combined_se: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxTable {
    pub rows: Vec<ApproxRow>,
    pub bound_decreasing: bool,
    /// The raw `∫|f′ − P_k|² dν̄_L` estimates, one per degree.
    pub norm_estimates: Vec<MeasureEstimate>,
}

/// Settings of [`approx_variance_convergence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxSettings {
    pub scheme: ApproxScheme,
    pub replicates: usize,
    pub master_seed: u64,
    /// Replicates of the norm estimator.
    pub norm_replicates: usize,
    pub norm_sampling: SiteSampling,
}

/// Standard error of `σ̂` from that of `σ̂²` by the delta method.
fn sigma_se(rep: &VarianceReport) -> f64 {
    if rep.sigma2_hat > 0.0 {
        rep.std_error / (2.0 * rep.sigma2_hat.sqrt())
    } else {
        rep.std_error.sqrt()
    }
}

/// For each degree `k`, compares `σ̂_{Q_k}` with `σ̂_f` where `Q_k` is the
/// primitive of the degree-`k` approximant `P_k` of `f′` on `interval`.
///
/// `X_f` and every `X_{Q_k}` are sampled on the same realizations, and the norms
/// share their `(ω, u)` draws. Combined SE:
/// `√(SE(σ̂_{Q_k})² + SE(σ̂_f)² + 8·SE(norm)²)`, with `SE(σ̂) = SE(σ̂²)/(2σ̂)`
/// and `SE(norm) = SE(norm²)/(2·norm)`.
#[allow(clippy::too_many_arguments)]
pub fn approx_variance_convergence(
    f: &SmoothFunction,
    degrees: &[usize],
    interval: (f64, f64),
    dim: usize,
    half_side: usize,
    ssd: &SsdSpec,
    settings: ApproxSettings,
) -> Result<ApproxTable> {
    if degrees.is_empty() || degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("degrees must be nonempty and strictly ascending, got {degrees:?}")));
    }
    let fprime = f.fprime();
    let approximants: Vec<Polynomial> = degrees
        .iter()
        .map(|&k| approximate(settings.scheme, &|x: f64| fprime(x), interval, k))
        .collect::<Result<_>>()?;

    let mut fs = vec![TestFunction::Smooth(f.clone())];
    fs.extend(approximants.iter().map(|p| TestFunction::Polynomial(p.antiderivative())));
    let samples = sample_many(dim, half_side, ssd, &fs, settings.replicates, settings.master_seed)?;
    let reports: Vec<VarianceReport> = samples.iter().map(variance_estimate).collect::<Result<_>>()?;

    let residuals: Vec<Box<dyn Fn(f64) -> f64 + Sync + '_>> = approximants
        .iter()
        .map(|p| {
            let fp = fprime.clone();
            Box::new(move |x: f64| fp(x) - p.eval(x)) as Box<dyn Fn(f64) -> f64 + Sync>
        })
        .collect();
    let labels: Vec<String> = degrees.iter().map(|k| format!("{}'-P{k}", f.label())).collect();
    let integrands: Vec<(Integrand<'_>, &str)> = residuals
        .iter()
        .zip(&labels)
        .map(|(g, l)| (g as Integrand<'_>, l.as_str()))
        .collect();
    let norms = fprime_norm_estimates(
        &integrands,
        dim,
        half_side,
        ssd,
        settings.norm_replicates,
        settings.master_seed,
        settings.norm_sampling,
    )?;

    let f_rep = &reports[0];
    let sigma_f = f_rep.sigma2_hat.sqrt();
    let rows: Vec<ApproxRow> = degrees
        .iter()
        .enumerate()
        .map(|(i, &degree)| {
            let q_rep = &reports[i + 1];
            let sigma_q = q_rep.sigma2_hat.sqrt();
            let est = &norms[i];
            let norm = est.value.max(0.0).sqrt();
            let norm_se = if norm > 0.0 {
                est.std_error / (2.0 * norm)
            } else {
                est.std_error.sqrt()
            };
            let bound = 8f64.sqrt() * norm;
            let combined_se = (sigma_se(q_rep).powi(2) + sigma_se(f_rep).powi(2) + 8.0 * norm_se * norm_se).sqrt();
            ApproxRow {
                degree,
                sigma_q,
                sigma_f,
                norm,
                norm_se,
                bound,
                combined_se,
                passes: (sigma_q - sigma_f).abs() <= bound + 3.0 * combined_se,
            }
        })
        .collect();
    let bound_decreasing = rows.windows(2).all(|w| w[1].bound < w[0].bound);
    Ok(ApproxTable {
        rows,
        bound_decreasing,
        norm_estimates: norms,
    })
}
