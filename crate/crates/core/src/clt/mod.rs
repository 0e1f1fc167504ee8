//! Sampling of the centered linear statistic, variance and normality checks,
//! and exact enumeration oracles over two-point disorder.

pub mod enumeration;
pub mod sampling;
pub mod scan;
pub mod stats;
pub mod trace;

pub use enumeration::{
    directional_decomposition, exact_variance, gauss_legendre_unit, martingale_decomposition,
    variance_bound_exact, DirectionalReport, EnumerationEngine, ExactBound, ExactVariance,
    FiltrationPlan, MartingaleDecomposition, MartingaleReport, MAX_ENUMERATION_SITES,
};
pub use sampling::{center_traces, sample_many, sample_x, SampleMeta, SampleSet};
pub use scan::{
    approx_variance_convergence, polynomial_variance_scan, ApproxRow, ApproxSettings, ApproxTable,
    PolynomialScan, ScanRow,
};
pub use stats::{
    ks_normal, normal_cdf, normality_test, positivity_check, shape_statistics, variance_bound_check,
    variance_estimate, NormalityThresholds, PositivityReport, PositivityVerdict, VarianceBoundCheck,
    VarianceReport,
};
pub use trace::{TracePolynomial, TRACE_WALK_BUDGET};
