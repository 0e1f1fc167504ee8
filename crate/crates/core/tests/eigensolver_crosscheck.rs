//! The self-authored eigensolver against nalgebra's symmetric eigendecomposition.

use std::sync::Arc;

use anderson_clt::model::{assemble_hamiltonian, enumerate_cube, sample_disorder, SsdSpec};
use anderson_clt::spectral::{eig_sym, eigenvalues, spectral_diagonal};
use approx::assert_relative_eq;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn reference(h: &anderson_clt::model::Hamiltonian) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let n = h.dim();
    let m = DMatrix::from_fn(n, n, |i, j| h.matrix().get(i, j));
    SymmetricEigen::new(m)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn spectra_and_diagonals_agree_on_lattices() {
    let ssds = [
        SsdSpec::rademacher(),
        SsdSpec::Uniform { lo: -2.0, hi: 2.0 },
        SsdSpec::Gaussian { mean: 0.5, std: 1.5 },
    ];
    for (d, l) in [(1usize, 20usize), (2, 4), (3, 2)] {
        let cube = Arc::new(enumerate_cube(d, l).unwrap());
        for (s, ssd) in ssds.iter().enumerate() {
            let field = sample_disorder(ssd, cube.clone(), 17, s as u64).unwrap();
            let h = assemble_hamiltonian(&cube, &field).unwrap();
            let ours = eig_sym(&h).unwrap();
            let theirs = reference(&h);
            let want = sorted(theirs.eigenvalues.iter().copied().collect());
            for (a, b) in ours.eigenvalues().iter().zip(&want) {
                assert_relative_eq!(*a, *b, epsilon = 1e-10);
            }
            // ⟨δ_n, f(H) δ_n⟩ is basis independent, so degenerate eigenspaces do not matter.
            for n in [0, cube.len() / 2, cube.len() - 1] {
                let f = |x: f64| x.atan();
                let want: f64 = (0..cube.len())
                    .map(|k| f(theirs.eigenvalues[k]) * theirs.eigenvectors[(n, k)].powi(2))
                    .sum();
                assert_relative_eq!(spectral_diagonal(&ours, &f, n), want, epsilon = 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigenvalues_only_path_matches(seed in 0u64..1000, l in 1usize..40) {
        let cube = Arc::new(enumerate_cube(1, l).unwrap());
        let field = sample_disorder(&SsdSpec::Uniform { lo: -3.0, hi: 3.0 }, cube.clone(), seed, 0).unwrap();
        let h = assemble_hamiltonian(&cube, &field).unwrap();
        let ours = eigenvalues(h.matrix()).unwrap();
        let want = sorted(reference(&h).eigenvalues.iter().copied().collect());
        for (a, b) in ours.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }
}
