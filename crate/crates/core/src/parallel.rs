//! Schedule-independent reductions and worker-pool helpers.
//!
//! Every estimator maps pure tasks in parallel, collects the per-task
//! results in index order, and only then reduces them sequentially with a
//! fixed summation tree. The numeric output therefore never depends on the
//! number of workers.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Pairwise (cascade) summation with a fixed split order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Maps `task` over `0..count` in parallel, keeping index order in the output.
pub fn ordered_map<T, F>(count: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(task).collect()
}

/// Like [`ordered_map`] for fallible tasks; the first error in index order wins.
pub fn try_ordered_map<T, F>(count: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let results: Vec<Result<T>> = (0..count).into_par_iter().map(task).collect();
    results.into_iter().collect()
}

/// Runs `job` on a dedicated pool with `workers` threads (0 = rayon default).
pub fn with_workers<T, F>(workers: usize, job: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(job))
}
