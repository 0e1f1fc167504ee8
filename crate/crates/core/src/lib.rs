//! Linear eigenvalue statistics of the finite-volume Anderson model.
//!
//! The crate builds random Hamiltonians `H = Δ + V` restricted to cubes of
//! `ℤ^d`, evaluates centered trace statistics `Tr f(H)`, and ships exact
//! oracles (walk-polynomial expansions, full enumeration over two-point
//! disorder) against which the Monte Carlo estimators are checked.
//!
//! Module map:
//!
//! - [`model`]: cubes, single-site distributions, disorder fields, Hamiltonians.
//! - [`spectral`]: dense symmetric eigensolver and spectral functional calculus.
//! - [`functions`]: polynomials, smooth `C¹` test functions, Bernstein approximation.
//! - [`moments`]: exact walk expansions of `⟨δ_n, H^k δ_n⟩` and moment diagnostics.
//! - [`measures`]: empirical IDS and estimators of the modified measures `ν̄_{p,L}`.
//! - [`clt`]: sampling of `X_{f,L}`, variance/normality checks, enumeration oracles.

pub mod clt;
pub mod error;
pub mod functions;
pub mod measures;
pub mod moments;
pub mod model;
pub mod parallel;
pub mod spectral;

pub use error::{Error, Result};

/// Crate version, recorded in run provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
