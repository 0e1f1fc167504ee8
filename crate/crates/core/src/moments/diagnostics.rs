//! Moment-growth bounds, the determinacy radius and SSD growth certificates.

use std::io::Write;

use serde::Serialize;

use super::exact::{dos_moment, dos_moment_finite, modified_moment, modified_moment_finite, MomentValue};
use super::walk::{moment_polynomial, Volume};
use crate::error::{Error, Result};
use crate::model::{GrowthConstants, SsdSpec};

/// `x^x` with `0⁰ = 1`.
fn self_power(x: u32) -> f64 {
    if x == 0 {
        1.0
    } else {
        (x as f64).powi(x as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
    /// `|value| / bound`.
    pub ratio: f64,
    pub passes: bool,
}

/// `|m̄_k| ≤ (2d+1)^k · C^k · a^{k+2p} · (k+2p)^{k+2p}`.
pub fn moment_bound(k: u32, dim: usize, growth: GrowthConstants, p: u32) -> f64 {
    let e = k + 2 * p;
    ((2 * dim + 1) as f64).powi(k as i32) * growth.c.powi(k as i32) * growth.a.powi(e as i32) * self_power(e)
}

pub fn moment_bound_check(value: f64, k: u32, dim: usize, growth: GrowthConstants, p: u32) -> BoundCheck {
    let bound = moment_bound(k, dim, growth, p);
    BoundCheck {
        value,
        bound,
        ratio: value.abs() / bound,
        passes: value.abs() <= bound,
    }
}

/// `1 / ((2d+1)·C·a·e)`, a lower bound on the convergence radius of `Σ m_k t^k / k!`.
pub fn carleman_radius(dim: usize, c: f64, a: f64) -> Result<f64> {
    if !(c >= 1.0 && a >= 1.0) {
        return Err(Error::invalid(format!("growth constants must satisfy C, a ≥ 1, got C={c}, a={a}")));
    }
    Ok(1.0 / ((2 * dim + 1) as f64 * c * a * std::f64::consts::E))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Determinacy {
    PositiveRadius,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanReport {
    pub lower_bound: f64,
    /// `max_{1≤k≤K} (|m_k| / k!)^{1/k}` over the supplied moments.
    pub empirical_limsup: f64,
    pub verdict: Determinacy,
}

/// Combines the analytic radius with the empirical growth of `moments[k] = m_k`.
pub fn carleman_analysis(dim: usize, growth: GrowthConstants, moments: &[f64]) -> Result<CarlemanReport> {
    let lower_bound = carleman_radius(dim, growth.c, growth.a)?;
    let mut log_fact = 0.0;
    let mut limsup: f64 = 0.0;
    for (k, m) in moments.iter().enumerate().skip(1) {
        log_fact += (k as f64).ln();
        if *m != 0.0 {
            limsup = limsup.max(((m.abs().ln() - log_fact) / k as f64).exp());
        }
    }
    let verdict = if limsup.is_finite() && moments.len() > 1 {
        Determinacy::PositiveRadius
    } else {
        Determinacy::Inconclusive
    };
    Ok(CarlemanReport {
        lower_bound,
        empirical_limsup: limsup,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCheck {
    pub constants: GrowthConstants,
    pub max_order: u32,
    /// Smallest `k` with `E|ω|^k > C·a^k·k^k`.
    pub first_violation: Option<u32>,
    /// `max_k E|ω|^k / (C·a^k·k^k)`.
    pub worst_ratio: f64,
}

impl GrowthCheck {
    pub fn passes(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Verifies the declared constants of `ssd` for `1 ≤ k ≤ max_order`.
pub fn ssd_growth_check(ssd: &SsdSpec, max_order: u32) -> Result<GrowthCheck> {
    ssd.validate()?;
    Ok(growth_check_with(ssd, ssd.growth_constants(), max_order))
}

pub fn growth_check_with(ssd: &SsdSpec, constants: GrowthConstants, max_order: u32) -> GrowthCheck {
    let mut first_violation = None;
    let mut worst_ratio: f64 = 0.0;
    for k in 1..=max_order {
        let ratio = ssd.abs_moment(k) / constants.bound(k);
        worst_ratio = worst_ratio.max(ratio);
        if ratio > 1.0 + 1e-12 && first_violation.is_none() {
            first_violation = Some(k);
        }
    }
    GrowthCheck {
        constants,
        max_order,
        first_violation,
        worst_ratio,
    }
}

/// One row of an exported moment table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub d: usize,
    pub k: usize,
    /// `None` for the DOS measure, `Some(p)` for `ν̄_p`.
    pub p: Option<u32>,
    pub volume: String,
    pub exact: String,
    pub value: f64,
}

/// Moments `k = 0..=k_max` of `ν` and of `ν̄_p` for each `p`, in the given volume.
pub fn moment_table(
    dim: usize,
    k_max: usize,
    ssd: &SsdSpec,
    ps: &[u32],
    volume: Volume,
) -> Result<Vec<MomentRow>> {
    ssd.validate()?;
    let mut rows = Vec::new();
    let origin = vec![0; dim];
    for k in 0..=k_max {
        let kinds = std::iter::once(None).chain(ps.iter().map(|&p| Some(p)));
        let wp = match volume {
            Volume::Infinite => Some(moment_polynomial(dim, k, &origin, volume)?),
            Volume::Finite(_) => None,
        };
        for p in kinds {
            let v: MomentValue = match (volume, &wp, p) {
                (Volume::Infinite, Some(wp), None) => dos_moment(wp, ssd)?,
                (Volume::Infinite, Some(wp), Some(p)) => modified_moment(wp, ssd, p)?,
                (Volume::Finite(l), _, None) => dos_moment_finite(dim, k, l, ssd)?,
                (Volume::Finite(l), _, Some(p)) => modified_moment_finite(dim, k, l, ssd, p)?,
                _ => unreachable!(),
            };
            rows.push(MomentRow {
                d: dim,
                k,
                p,
                volume: volume.to_string(),
                exact: v.exact_string(),
                value: v.value,
            });
        }
    }
    Ok(rows)
}

/// CSV with header `d,k,p,volume,exact,value`; `p` is empty for the DOS measure.
pub fn write_moment_csv<W: Write>(rows: &[MomentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::invalid(format!("csv output failed: {e}"));
    w.write_record(["d", "k", "p", "volume", "exact", "value"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            r.k.to_string(),
            r.p.map(|p| p.to_string()).unwrap_or_default(),
            r.volume.clone(),
            r.exact.clone(),
            format!("{:e}", r.value),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: GrowthConstants = GrowthConstants { c: 1.0, a: 1.0 };

    #[test]
    fn bound_examples() {
        assert_eq!(moment_bound(2, 1, UNIT, 1), 2304.0);
        let r = moment_bound_check(7.0 / 3.0, 2, 1, UNIT, 1);
        assert!(r.passes && (r.ratio - 7.0 / 3.0 / 2304.0).abs() < 1e-15);
        // k = 0, p = 0: E(ω⁰) = 1 ≤ 0⁰ = 1
        assert!(moment_bound_check(1.0, 0, 1, UNIT, 0).passes);
        assert!(!moment_bound_check(10.0, 0, 1, UNIT, 0).passes);
    }

    #[test]
    fn radius_formula() {
        let r1 = carleman_radius(1, 1.0, 1.0).unwrap();
        assert!((r1 - 1.0 / (3.0 * std::f64::consts::E)).abs() < 1e-15);
        assert!((r1 - 0.1226).abs() < 1e-4);
        let r2 = carleman_radius(2, 1.0, 1.0).unwrap();
        assert!((r2 - 1.0 / (5.0 * std::f64::consts::E)).abs() < 1e-15);
        assert!(carleman_radius(1, 0.5, 1.0).is_err());
    }

    #[test]
    fn rademacher_table_is_bounded_and_determinate() {
        let rows = moment_table(1, 8, &SsdSpec::rademacher(), &[1], Volume::Infinite).unwrap();
        let dos: Vec<f64> = rows.iter().filter(|r| r.p.is_none()).map(|r| r.value).collect();
        assert_eq!(dos.len(), 9);
        let rep = carleman_analysis(1, UNIT, &dos).unwrap();
        assert_eq!(rep.verdict, Determinacy::PositiveRadius);
        assert!(rep.empirical_limsup.is_finite() && rep.empirical_limsup > 0.0);
        for r in rows.iter().filter(|r| r.p == Some(1)) {
            assert!(moment_bound_check(r.value, r.k as u32, 1, UNIT, 1).passes);
        }
    }

    #[test]
    fn growth_certificates() {
        for ssd in [
            SsdSpec::rademacher(),
            SsdSpec::Uniform { lo: -1.0, hi: 1.0 },
            SsdSpec::Gaussian { mean: 0.0, std: 1.0 },
            SsdSpec::Gaussian { mean: 1.5, std: 0.3 },
        ] {
            let g = ssd_growth_check(&ssd, 40).unwrap();
            assert!(g.passes(), "{ssd}: {g:?}");
        }
        // too-small constants are caught at the first failing order
        let bad = growth_check_with(
            &SsdSpec::Gaussian { mean: 0.0, std: 3.0 },
            GrowthConstants { c: 1.0, a: 1.0 },
            10,
        );
        assert_eq!(bad.first_violation, Some(1));
    }

    #[test]
    fn csv_export() {
        let rows = moment_table(1, 2, &SsdSpec::rademacher(), &[1], Volume::Infinite).unwrap();
        let mut buf = Vec::new();
        write_moment_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,k,p,volume,exact,value\n"));
        assert!(text.contains("1,2,1,infinite,7/3,"));
        assert!(text.contains("1,2,,infinite,3,"));
    }
}
