//! Empirical integrated density of states and estimators of the modified measures.

pub mod ids;
pub mod nubar;

pub use ids::{empirical_ids, ids_moment_convergence, EmpiricalDistribution, IdsConvergence, IdsMomentRow};
pub use nubar::{
    fprime_norm_estimate, fprime_norm_estimates, nubar_moment_exact_finite, nubar_moment_mc,
    polynomial_norm_exact_finite, write_estimates_csv, EstimateParams, Integrand, MeasureEstimate, SiteSampling,
};
