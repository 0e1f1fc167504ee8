//! Replicated sampling of the centered linear statistic
//! `X_{f,L} = (Tr f(H_L) − mean) / |Λ_L|^{1/2}`.

use std::sync::Arc;

use serde::Serialize;

use super::trace::TracePolynomial;
use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::model::{assemble_hamiltonian, enumerate_cube, sample_disorder, SsdSpec};
use crate::parallel::{pairwise_mean, try_ordered_map};
use crate::spectral::{eigenvalues, trace_of};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMeta {
    pub d: usize,
    pub l: usize,
    pub label: String,
    pub ssd: SsdSpec,
    pub replicates: usize,
    pub seed: u64,
}

/// Samples of `X_{f,L}`, one per replicate, centered by the cross-replicate mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub values: Vec<f64>,
    /// Raw traces `Tr f(H^{ω_r}_L)`.
    pub traces: Vec<f64>,
    pub meta: SampleMeta,
    pub centered: bool,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `|Λ_L| = (2L+1)^d`.
    pub fn volume(&self) -> usize {
        (2 * self.meta.l + 1).pow(self.meta.d as u32)
    }
}

/// Centers traces at their sample mean and scales by `|Λ|^{-1/2}`.
///
/// The mean is formed as `T_0 + mean(T_r − T_0)`, so identical traces give
/// exactly zero samples.
pub fn center_traces(traces: &[f64], volume: usize) -> Vec<f64> {
    if traces.is_empty() {
        return Vec::new();
    }
    let t0 = traces[0];
    let diffs: Vec<f64> = traces.iter().map(|t| t - t0).collect();
    let shift = pairwise_mean(&diffs);
    let scale = (volume as f64).sqrt();
    diffs.iter().map(|d| (d - shift) / scale).collect()
}

pub fn sample_x(
    dim: usize,
    half_side: usize,
    ssd: &SsdSpec,
    f: &TestFunction,
    replicates: usize,
    master_seed: u64,
) -> Result<SampleSet> {
    let mut v = sample_many(dim, half_side, ssd, std::slice::from_ref(f), replicates, master_seed)?;
    Ok(v.remove(0))
}

/// Samples several test functions on the same disorder realizations.
///
/// Polynomials whose walk expansion fits [`super::trace::TRACE_WALK_BUDGET`] are traced
/// through that expansion; every other function through the eigenvalues,
/// which are computed once per replicate.
pub fn sample_many(
    dim: usize,
    half_side: usize,
    ssd: &SsdSpec,
    fs: &[TestFunction],
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<SampleSet>> {
    if replicates < 2 {
        return Err(Error::invalid(format!("need at least 2 replicates, got {replicates}")));
    }
    ssd.validate()?;
    let cube = Arc::new(enumerate_cube(dim, half_side)?);
    let plans: Vec<Option<TracePolynomial>> = fs
        .iter()
        .map(|f| match f.as_polynomial() {
            Some(p) => TracePolynomial::build(&cube, p),
            None => Ok(None),
        })
        .collect::<Result<_>>()?;
    let need_spectrum = plans.iter().any(Option::is_none);

    let rows = try_ordered_map(replicates, |r| {
        let job = || -> Result<Vec<f64>> {
            let field = sample_disorder(ssd, cube.clone(), master_seed, r as u64)?;
            let ev = if need_spectrum {
                let h = assemble_hamiltonian(&cube, &field)?;
                Some(eigenvalues(h.matrix())?)
            } else {
                None
            };
            Ok(fs
                .iter()
                .zip(&plans)
                .map(|(f, plan)| match plan {
                    Some(tp) => tp.evaluate(field.values()),
                    None => trace_of(ev.as_ref().expect("spectrum computed"), f),
                })
                .collect())
        };
        job().map_err(|e| e.in_replicate(r as u64))
    })?;

    Ok(fs
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let traces: Vec<f64> = rows.iter().map(|row| row[i]).collect();
            SampleSet {
                values: center_traces(&traces, cube.len()),
                traces,
                meta: SampleMeta {
                    d: dim,
                    l: half_side,
                    label: f.label(),
                    ssd: *ssd,
                    replicates,
                    seed: master_seed,
                },
                centered: true,
            }
        })
        .collect())
}
