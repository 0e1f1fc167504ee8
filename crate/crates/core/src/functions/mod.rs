//! Test functions: polynomials, smooth `C¹_P` functions and polynomial
//! approximation of derivatives.

pub mod approx;
pub mod catalog;
pub mod polynomial;
pub mod smooth;

pub use approx::{approximate, bernstein_approx, chebyshev_approx, grid_sup_error, ApproxScheme};
pub use polynomial::Polynomial;
pub use smooth::{Evaluate, RealFn, SmoothFunction, TestFunction, Validity};
