use std::sync::Arc;

use super::cube::LatticeCube;
use super::disorder::DisorderField;
use super::ssd::SsdSpec;
use crate::error::{Error, Result};
use crate::spectral::SymmetricMatrix;

/// `H^ω_L = χ_L (Δ + V^ω) χ_L` on `ℓ²(Λ_L)`, open boundary.
///
/// Row and column `i` correspond to `cube.sites()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    cube: Arc<LatticeCube>,
    matrix: SymmetricMatrix,
}

impl Hamiltonian {
    pub fn cube(&self) -> &Arc<LatticeCube> {
        &self.cube
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn potential(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i)).collect()
    }

    /// Same hopping, diagonal replaced by `values`.
    pub fn with_potential(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: values.len(),
            });
        }
        let mut out = self.clone();
        for (i, &v) in values.iter().enumerate() {
            out.matrix.set(i, i, v);
        }
        Ok(out)
    }

    /// `H + t·P_n` with `P_n = |δ_n⟩⟨δ_n|`.
    pub fn perturb_site(&self, site_index: usize, t: f64) -> Self {
        let mut out = self.clone();
        let v = out.matrix.get(site_index, site_index);
        out.matrix.set(site_index, site_index, v + t);
        out
    }

    /// `ω_n → u·ω_n` at one site.
    pub fn scale_site(&self, site_index: usize, u: f64) -> Self {
        let mut out = self.clone();
        let v = out.matrix.get(site_index, site_index);
        out.matrix.set(site_index, site_index, u * v);
        out
    }
}

pub fn assemble_hamiltonian(cube: &Arc<LatticeCube>, field: &DisorderField) -> Result<Hamiltonian> {
    if field.cube().as_ref() != cube.as_ref() {
        return Err(Error::DimensionMismatch {
            expected: cube.len(),
            got: field.values().len(),
        });
    }
    Ok(hamiltonian_from_potential(cube, field.values()))
}

/// Assembles the Hamiltonian from raw per-site values (length must equal `cube.len()`).
pub fn hamiltonian_from_potential(cube: &Arc<LatticeCube>, potential: &[f64]) -> Hamiltonian {
    assert_eq!(potential.len(), cube.len(), "potential length must match the cube");
    let n = cube.len();
    let mut matrix = SymmetricMatrix::zeros(n);
    for (i, &w) in potential.iter().enumerate() {
        matrix.set(i, i, w);
        for j in cube.neighbors(i) {
            if j > i {
                matrix.set_sym(i, j, 1.0);
            }
        }
    }
    Hamiltonian {
        cube: Arc::clone(cube),
        matrix,
    }
}

/// Hull of the almost-sure spectrum `[−2d, 2d] + supp μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumSupport {
    Interval(f64, f64),
    Unbounded,
}

impl SpectrumSupport {
    pub fn contains_interval(&self, lo: f64, hi: f64) -> bool {
        match *self {
            SpectrumSupport::Interval(a, b) => a <= lo && hi <= b,
            SpectrumSupport::Unbounded => true,
        }
    }
}

pub fn spectrum_support(ssd: &SsdSpec, dim: usize) -> SpectrumSupport {
    let band = 2.0 * dim as f64;
    match ssd.support_hull() {
        Some((lo, hi)) => SpectrumSupport::Interval(lo - band, hi + band),
        None => SpectrumSupport::Unbounded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cube::enumerate_cube;
    use crate::model::disorder::sample_disorder;
    use crate::spectral::eig_sym;

    fn cube(d: usize, l: usize) -> Arc<LatticeCube> {
        Arc::new(enumerate_cube(d, l).unwrap())
    }

    #[test]
    fn three_site_chain() {
        let c = cube(1, 1);
        let h = assemble_hamiltonian(&c, &DisorderField::constant(c.clone(), 0.0)).unwrap();
        let expect = [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        for (i, row) in expect.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(h.matrix().get(i, j), v);
            }
        }
        let e = eig_sym(&h).unwrap();
        let s2 = 2f64.sqrt();
        for (got, want) in e.eigenvalues().iter().zip([-s2, 0.0, s2]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_shift() {
        let c = cube(2, 2);
        let h0 = assemble_hamiltonian(&c, &DisorderField::constant(c.clone(), 0.0)).unwrap();
        let h3 = assemble_hamiltonian(&c, &DisorderField::constant(c.clone(), 3.0)).unwrap();
        let e0 = eig_sym(&h0).unwrap();
        let e3 = eig_sym(&h3).unwrap();
        for (a, b) in e0.eigenvalues().iter().zip(e3.eigenvalues()) {
            assert!((a + 3.0 - b).abs() < 1e-10);
        }
    }

    #[test]
    fn structure_invariants() {
        let c = cube(2, 1);
        let f = sample_disorder(&SsdSpec::Uniform { lo: -1.0, hi: 1.0 }, c.clone(), 4, 0).unwrap();
        let h = assemble_hamiltonian(&c, &f).unwrap();
        let m = h.matrix();
        for i in 0..c.len() {
            assert_eq!(m.get(i, i), f.values()[i]);
            let units = (0..c.len()).filter(|&j| j != i && m.get(i, j) == 1.0).count();
            assert_eq!(units, c.neighbors(i).len());
            for j in 0..c.len() {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
        let center = c.index_of(&[0, 0]).unwrap();
        assert_eq!(c.neighbors(center).len(), 4);
    }

    #[test]
    fn mismatched_field_rejected() {
        let f = DisorderField::constant(cube(1, 2), 0.0);
        assert!(assemble_hamiltonian(&cube(1, 1), &f).is_err());
    }

    #[test]
    fn support_hulls() {
        let u = SsdSpec::Uniform { lo: -1.0, hi: 1.0 };
        assert_eq!(spectrum_support(&u, 1), SpectrumSupport::Interval(-3.0, 3.0));
        let b = SsdSpec::TwoPoint { a: 0.0, b: 1.0, prob_a: 0.5 };
        assert_eq!(spectrum_support(&b, 2), SpectrumSupport::Interval(-4.0, 5.0));
        let g = SsdSpec::Gaussian { mean: 0.0, std: 1.0 };
        assert_eq!(spectrum_support(&g, 3), SpectrumSupport::Unbounded);
    }
}
