//! Dense symmetric eigendecomposition and spectral functional calculus.

pub mod eigen;
pub mod functional;
pub mod matrix;

pub use eigen::{eig_sym, eig_sym_matrix, eigenvalues, site_weights, EigenDecomposition, SiteWeights};
pub use functional::{
    diagonal_from_weights, hellmann_feynman_check, hellmann_feynman_matrix, spectral_diagonal, trace_function, trace_of,
    HellmannFeynman, DEGENERACY_GAP,
};
pub use matrix::SymmetricMatrix;
