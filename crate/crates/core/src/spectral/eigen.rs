//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration with Wilkinson-type shifts. The QL rotations act on the
//! accumulated transformation one row at a time, so any subset of rows
//! of the eigenvector matrix can be carried along at `O(n)` cost per row
//! per sweep. Matrices that are already tridiagonal (every `d = 1`
//! Hamiltonian in lexicographic order) skip the Householder stage.

use crate::error::{Error, Result};
use crate::model::Hamiltonian;

use super::matrix::SymmetricMatrix;

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in ascending order with orthonormal eigenvectors.
///
/// `vectors` is row-major with `vectors[i * m + k] = ψ_k(i)`, so row `i`
/// holds the components of every eigenvector at site `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
    dim: usize,
}

impl EigenDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `ψ_k(i)`.
    pub fn component(&self, site: usize, k: usize) -> f64 {
        self.vectors[site * self.dim + k]
    }

    /// Components of all eigenvectors at one site.
    pub fn site_row(&self, site: usize) -> &[f64] {
        &self.vectors[site * self.dim..(site + 1) * self.dim]
    }

    /// `‖H·Ψ − Ψ·diag(E)‖_max`.
    pub fn residual(&self, h: &SymmetricMatrix) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let row = h.row(i);
            for k in 0..n {
                let mut hv = 0.0;
                for (j, &hij) in row.iter().enumerate() {
                    if hij != 0.0 {
                        hv += hij * self.component(j, k);
                    }
                }
                worst = worst.max((hv - self.eigenvalues[k] * self.component(i, k)).abs());
            }
        }
        worst
    }

    /// `‖ΨᵀΨ − I‖_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let dot: f64 = (0..n).map(|i| self.component(i, a) * self.component(i, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Smallest gap between consecutive eigenvalues (`∞` for `m ≤ 1`).
    pub fn min_gap(&self) -> f64 {
        min_gap(&self.eigenvalues)
    }
}

pub(crate) fn min_gap(sorted: &[f64]) -> f64 {
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues plus squared eigenvector components at selected sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteWeights {
    pub eigenvalues: Vec<f64>,
    /// `weights[s][k] = |ψ_k(sites[s])|²`, aligned with `eigenvalues`.
    pub weights: Vec<Vec<f64>>,
}

pub fn eig_sym(h: &Hamiltonian) -> Result<EigenDecomposition> {
    eig_sym_matrix(h.matrix())
}

pub fn eig_sym_matrix(m: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let all: Vec<usize> = (0..n).collect();
    let (eigenvalues, rows) = solve(m, Some(&all))?;
    let mut vectors = Vec::with_capacity(n * n);
    for row in rows {
        vectors.extend_from_slice(&row);
    }
    Ok(EigenDecomposition {
        eigenvalues,
        vectors,
        dim: n,
    })
}

/// Ascending eigenvalues without eigenvectors.
pub fn eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    solve(m, None).map(|(e, _)| e)
}

pub fn site_weights(m: &SymmetricMatrix, sites: &[usize]) -> Result<SiteWeights> {
    if let Some(&bad) = sites.iter().find(|&&s| s >= m.dim()) {
        return Err(Error::invalid(format!(
            "site index {bad} out of range for dimension {}",
            m.dim()
        )));
    }
    let (eigenvalues, rows) = solve(m, Some(sites))?;
    let weights = rows
        .into_iter()
        .map(|r| r.into_iter().map(|x| x * x).collect())
        .collect();
    Ok(SiteWeights {
        eigenvalues,
        weights,
    })
}

/// Returns sorted eigenvalues and, when requested, the selected rows of
/// the eigenvector matrix with columns in the same order.
fn solve(m: &SymmetricMatrix, rows: Option<&[usize]>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.dim();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let (mut diag, mut off, mut tracked) = if m.is_tridiagonal() {
        let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
        let mut off = vec![0.0; n];
        for i in 0..n - 1 {
            off[i] = m.get(i, i + 1);
        }
        let tracked = rows
            .map(|r| {
                r.iter()
                    .map(|&i| {
                        let mut e = vec![0.0; n];
                        e[i] = 1.0;
                        e
                    })
                    .collect()
            })
            .unwrap_or_default();
        (diag, off, tracked)
    } else {
        let (diag, off, q) = householder_tridiagonalize(m, rows.is_some());
        let tracked = match (rows, q) {
            (Some(r), Some(q)) => r.iter().map(|&i| q[i * n..(i + 1) * n].to_vec()).collect(),
            _ => Vec::new(),
        };
        (diag, off, tracked)
    };

    implicit_ql(&mut diag, &mut off, &mut tracked).map_err(|l| Error::NoConvergence {
        context: format!(
            "QL iteration stalled at index {l} of {n}; matrix fingerprint {:016x}",
            m.fingerprint()
        ),
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let tracked = tracked
        .into_iter()
        .map(|row| order.iter().map(|&k| row[k]).collect())
        .collect();
    Ok((eigenvalues, tracked))
}

/// Householder reduction `A = Q T Qᵀ`.
///
/// Returns the diagonal of `T`, its off-diagonal as `off[i] = T[i][i+1]`
/// (with `off[n−1] = 0`), and `Q` row-major when `want_q`.
fn householder_tridiagonalize(
    m: &SymmetricMatrix,
    want_q: bool,
) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let idx = |i: usize, j: usize| i * n + j;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[idx(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let f = a[idx(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    a[idx(j, i)] = a[idx(i, j)] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[idx(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[idx(j, k)] -= f * e[k] + g * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;

    let q = if want_q {
        for i in 0..n {
            if d[i] != 0.0 {
                for j in 0..i {
                    let g: f64 = (0..i).map(|k| a[idx(i, k)] * a[idx(k, j)]).sum();
                    for k in 0..i {
                        a[idx(k, j)] -= g * a[idx(k, i)];
                    }
                }
            }
            d[i] = a[idx(i, i)];
            a[idx(i, i)] = 1.0;
            for j in 0..i {
                a[idx(j, i)] = 0.0;
                a[idx(i, j)] = 0.0;
            }
        }
        Some(a)
    } else {
        for i in 0..n {
            d[i] = a[idx(i, i)];
        }
        None
    };

    // e[i] is the subdiagonal T[i][i-1]; shift to superdiagonal indexing.
    let mut off = vec![0.0; n];
    off[..n - 1].copy_from_slice(&e[1..n]);
    (d, off, q)
}

/// Implicit QL on a symmetric tridiagonal matrix, in place.
///
/// `rows` are rows of the accumulated orthogonal transformation; each is
/// updated by the same plane rotations. On failure returns the index whose
/// off-diagonal element did not deflate.
fn implicit_ql(d: &mut [f64], e: &mut [f64], rows: &mut [Vec<f64>]) -> std::result::Result<(), usize> {
    let n = d.len();
    if n > 0 {
        e[n - 1] = 0.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(l);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in rows.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rng::{CounterStream, Purpose};

    fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
        let mut s = CounterStream::new(seed, 0, Purpose::Synthetic);
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set_sym(i, j, 2.0 * s.uniform((i * n + j) as u64) - 1.0);
            }
        }
        m
    }

    fn check(m: &SymmetricMatrix) {
        let dec = eig_sym_matrix(m).unwrap();
        let scale = 1.0 + dec.eigenvalues().iter().fold(0.0f64, |a, e| a.max(e.abs()));
        assert!(dec.residual(m) <= 1e-8 * scale, "residual {}", dec.residual(m));
        assert!(dec.orthogonality_defect() <= 1e-8);
        assert!(dec.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn two_by_two() {
        let m = SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = eig_sym_matrix(&m).unwrap();
        assert!((e.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_sorted() {
        let m = SymmetricMatrix::from_diagonal(&[3.0, -1.0, 2.0]);
        assert_eq!(eig_sym_matrix(&m).unwrap().eigenvalues(), &[-1.0, 2.0, 3.0]);
    }

    #[test]
    fn trivial_sizes() {
        assert!(eigenvalues(&SymmetricMatrix::zeros(0)).unwrap().is_empty());
        let one = eig_sym_matrix(&SymmetricMatrix::from_diagonal(&[4.5])).unwrap();
        assert_eq!(one.eigenvalues(), &[4.5]);
        assert_eq!(one.component(0, 0).abs(), 1.0);
    }

    #[test]
    fn random_dense_matrices() {
        for (n, seed) in [(3, 1), (5, 2), (17, 3), (40, 4), (64, 5)] {
            check(&random_symmetric(n, seed));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // identity plus rank-one: eigenvalue 1 with multiplicity n-1
        let n = 12;
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = if i == j { 2.0 } else { 1.0 };
                m.set_sym(i, j, v);
            }
        }
        check(&m);
        let e = eigenvalues(&m).unwrap();
        assert!((e[n - 1] - (n as f64 + 1.0)).abs() < 1e-10);
        assert!(e[..n - 1].iter().all(|x| (x - 1.0).abs() < 1e-10));
    }

    #[test]
    fn values_only_and_site_rows_agree_with_full() {
        let m = random_symmetric(23, 9);
        let full = eig_sym_matrix(&m).unwrap();
        assert_eq!(eigenvalues(&m).unwrap(), full.eigenvalues());
        let w = site_weights(&m, &[4, 0]).unwrap();
        for (s, site) in [4usize, 0].iter().enumerate() {
            for k in 0..23 {
                assert!((w.weights[s][k] - full.component(*site, k).powi(2)).abs() < 1e-12);
            }
        }
        assert!(site_weights(&m, &[23]).is_err());
    }

    #[test]
    fn tridiagonal_fast_path() {
        let n = 30;
        let mut m = SymmetricMatrix::zeros(n);
        let mut s = CounterStream::new(3, 0, Purpose::Synthetic);
        for i in 0..n {
            m.set(i, i, s.uniform(i as u64) * 4.0 - 2.0);
            if i + 1 < n {
                m.set_sym(i, i + 1, 1.0);
            }
        }
        assert!(m.is_tridiagonal());
        check(&m);
    }
}
