//! Cubes of `ℤ^d`, single-site distributions, disorder fields and the
//! finite-volume Anderson Hamiltonian.

pub mod cube;
pub mod disorder;
pub mod hamiltonian;
pub mod rng;
pub mod ssd;

pub use cube::{enumerate_cube, enumerate_cube_with_budget, interior_cube, LatticeCube, Site};
pub use disorder::{sample_disorder, DisorderField, Provenance};
pub use hamiltonian::{
    assemble_hamiltonian, hamiltonian_from_potential, spectrum_support, Hamiltonian,
    SpectrumSupport,
};
pub use ssd::{GrowthConstants, SsdSpec};
