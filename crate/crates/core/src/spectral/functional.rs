//! Spectral functional calculus on a decomposition: `⟨δ_n, f(H) δ_n⟩`,
//! `Tr f(H)` and the trace-derivative (Hellmann–Feynman) check.

use crate::error::{Error, Result};
use crate::functions::{Evaluate, TestFunction};
use crate::model::Hamiltonian;
use crate::parallel::pairwise_sum;

use super::eigen::{eig_sym_matrix, eigenvalues, min_gap, EigenDecomposition};
use super::matrix::SymmetricMatrix;

/// Gap below which the spectrum is reported as (numerically) degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// `Σ_k f(E_k) |ψ_k(n)|²`.
pub fn spectral_diagonal<F: Evaluate + ?Sized>(
    dec: &EigenDecomposition,
    f: &F,
    site_index: usize,
) -> f64 {
    weighted_sum(dec.eigenvalues(), dec.site_row(site_index), f, true)
}

/// `Σ_k f(E_k) w_k` for precomputed weights `w_k = |ψ_k(n)|²`.
pub fn diagonal_from_weights<F: Evaluate + ?Sized>(eigenvalues: &[f64], weights: &[f64], f: &F) -> f64 {
    weighted_sum(eigenvalues, weights, f, false)
}

fn weighted_sum<F: Evaluate + ?Sized>(e: &[f64], w: &[f64], f: &F, square: bool) -> f64 {
    let terms: Vec<f64> = e
        .iter()
        .zip(w)
        .map(|(&x, &c)| f.eval(x) * if square { c * c } else { c })
        .collect();
    pairwise_sum(&terms)
}

/// `Tr f(H) = Σ_k f(E_k)`.
pub fn trace_function<F: Evaluate + ?Sized>(dec: &EigenDecomposition, f: &F) -> f64 {
    trace_of(dec.eigenvalues(), f)
}

pub fn trace_of<F: Evaluate + ?Sized>(eigenvalues: &[f64], f: &F) -> f64 {
    let terms: Vec<f64> = eigenvalues.iter().map(|&x| f.eval(x)).collect();
    pairwise_sum(&terms)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HellmannFeynman {
    /// `⟨δ_n, f′(H) δ_n⟩`.
    pub formula: f64,
    /// `[Tr f(H + hP_n) − Tr f(H − hP_n)] / 2h`.
    pub finite_diff: f64,
    pub abs_err: f64,
    /// Smallest eigenvalue gap was below [`DEGENERACY_GAP`]; the formula is
    /// basis independent, so the values remain valid.
    pub degenerate: bool,
}

pub fn hellmann_feynman_check(
    h: &Hamiltonian,
    f: &TestFunction,
    site_index: usize,
    step: f64,
) -> Result<HellmannFeynman> {
    hellmann_feynman_matrix(h.matrix(), f, site_index, step)
}

/// [`hellmann_feynman_check`] for an arbitrary symmetric matrix.
pub fn hellmann_feynman_matrix(
    h: &SymmetricMatrix,
    f: &TestFunction,
    site_index: usize,
    step: f64,
) -> Result<HellmannFeynman> {
    if !(step > 0.0) {
        return Err(Error::invalid(format!("finite-difference step must be positive, got {step}")));
    }
    if site_index >= h.dim() {
        return Err(Error::invalid(format!(
            "site index {site_index} out of range for dimension {}",
            h.dim()
        )));
    }
    let dec = eig_sym_matrix(h)?;
    let fprime = f.derivative();
    let formula = spectral_diagonal(&dec, &|x: f64| fprime(x), site_index);
    let shifted = |t: f64| {
        let mut m = h.clone();
        m.set(site_index, site_index, h.get(site_index, site_index) + t);
        eigenvalues(&m)
    };
    let plus = shifted(step)?;
    let minus = shifted(-step)?;
    let finite_diff = (trace_of(&plus, f) - trace_of(&minus, f)) / (2.0 * step);
    Ok(HellmannFeynman {
        formula,
        finite_diff,
        abs_err: (formula - finite_diff).abs(),
        degenerate: min_gap(dec.eigenvalues()) < DEGENERACY_GAP,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::functions::catalog::lookup;
    use crate::functions::Polynomial;
    use crate::model::{
        assemble_hamiltonian, enumerate_cube, sample_disorder, DisorderField, SsdSpec,
    };
    use crate::spectral::{eig_sym, eig_sym_matrix};

    fn chain(l: usize, ssd: &SsdSpec, seed: u64) -> Hamiltonian {
        let c = Arc::new(enumerate_cube(1, l).unwrap());
        let f = sample_disorder(ssd, c.clone(), seed, 0).unwrap();
        assemble_hamiltonian(&c, &f).unwrap()
    }

    #[test]
    fn normalization_and_identity() {
        let c = Arc::new(enumerate_cube(2, 2).unwrap());
        let field = sample_disorder(&SsdSpec::Uniform { lo: -2.0, hi: 2.0 }, c.clone(), 5, 0).unwrap();
        let h = assemble_hamiltonian(&c, &field).unwrap();
        let dec = eig_sym(&h).unwrap();
        for n in 0..c.len() {
            assert!((spectral_diagonal(&dec, &|_| 1.0, n) - 1.0).abs() < 1e-8);
            assert!((spectral_diagonal(&dec, &|x| x, n) - field.values()[n]).abs() < 1e-10);
        }
    }

    #[test]
    fn three_site_center_square() {
        let c = Arc::new(enumerate_cube(1, 1).unwrap());
        let h = assemble_hamiltonian(&c, &DisorderField::constant(c.clone(), 0.0)).unwrap();
        let dec = eig_sym(&h).unwrap();
        assert!((spectral_diagonal(&dec, &|x: f64| x * x, 1) - 2.0).abs() < 1e-12);
        assert!((trace_function(&dec, &|x: f64| x * x) - 4.0).abs() < 1e-12);
        assert!((trace_function(&dec, &|_| 2.5) - 7.5).abs() < 1e-12);
    }

    #[test]
    fn trace_identities() {
        let h = chain(12, &SsdSpec::Gaussian { mean: 0.3, std: 1.0 }, 2);
        let dec = eig_sym(&h).unwrap();
        let sum_diag: f64 = (0..h.dim()).map(|n| spectral_diagonal(&dec, &f64::atan, n)).sum();
        assert!((sum_diag - trace_function(&dec, &f64::atan)).abs() < 1e-8 * h.dim() as f64);
        assert!((trace_function(&dec, &|x| x) - h.matrix().trace()).abs() < 1e-10);
        assert!((trace_function(&dec, &|x: f64| x * x) - h.matrix().frobenius_sq()).abs() < 1e-9);
    }

    #[test]
    fn outputs_invariant_under_symmetric_permutation() {
        let h = chain(6, &SsdSpec::rademacher(), 8);
        let n = h.dim();
        let perm: Vec<usize> = (0..n).map(|i| (i * 5 + 3) % n).collect();
        let a = eig_sym(&h).unwrap();
        let b = eig_sym_matrix(&h.matrix().permuted(&perm)).unwrap();
        for i in 0..n {
            let x = spectral_diagonal(&a, &f64::tanh, i);
            let y = spectral_diagonal(&b, &f64::tanh, perm[i]);
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn quadratic_central_difference_is_exact() {
        let h = chain(4, &SsdSpec::Uniform { lo: -1.0, hi: 1.0 }, 3);
        let sq = TestFunction::Polynomial(Polynomial::monomial(2, 1.0));
        for n in 0..h.dim() {
            let r = hellmann_feynman_check(&h, &sq, n, 1e-3).unwrap();
            let w = h.matrix().get(n, n);
            assert!((r.formula - 2.0 * w).abs() < 1e-10);
            assert!((r.finite_diff - 2.0 * w).abs() < 1e-8);
        }
    }

    #[test]
    fn cubic_random_five_by_five() {
        let mut m = SymmetricMatrix::zeros(5);
        let mut s = crate::model::rng::CounterStream::new(1, 0, crate::model::rng::Purpose::Synthetic);
        for i in 0..5 {
            for j in 0..=i {
                m.set_sym(i, j, 2.0 * s.uniform((5 * i + j) as u64) - 1.0);
            }
        }
        let cube = TestFunction::Polynomial(Polynomial::monomial(3, 1.0));
        for n in 0..5 {
            let r = hellmann_feynman_matrix(&m, &cube, n, 1e-4).unwrap();
            assert!(r.abs_err <= 1e-6, "{r:?}");
        }
    }

    #[test]
    fn arctan_error_is_second_order() {
        let h = chain(10, &SsdSpec::rademacher(), 7);
        let f = TestFunction::Smooth(lookup("arctan").unwrap());
        let n = 10;
        let e1 = hellmann_feynman_check(&h, &f, n, 0.02).unwrap().abs_err;
        let e2 = hellmann_feynman_check(&h, &f, n, 0.01).unwrap().abs_err;
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn bad_arguments() {
        let h = chain(1, &SsdSpec::rademacher(), 0);
        let f = TestFunction::Polynomial(Polynomial::monomial(2, 1.0));
        assert!(hellmann_feynman_check(&h, &f, 0, 0.0).is_err());
        assert!(hellmann_feynman_check(&h, &f, 3, 1e-3).is_err());
    }
}
