//! Walk-polynomial expansions of diagonal matrix elements and exact moment diagnostics.

pub mod diagnostics;
pub mod exact;
pub mod walk;

pub use diagnostics::{
    carleman_analysis, carleman_radius, growth_check_with, moment_bound, moment_bound_check,
    moment_table, ssd_growth_check, write_moment_csv, BoundCheck, CarlemanReport, Determinacy,
    GrowthCheck, MomentRow,
};
pub use exact::{dos_moment, dos_moment_finite, modified_moment, modified_moment_finite, MomentValue};
pub use walk::{moment_polynomial, moment_polynomial_with_budget, Monomial, Volume, WalkPolynomial, DEFAULT_WALK_BUDGET};
