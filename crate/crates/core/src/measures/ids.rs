//! Normalized eigenvalue counting measures and their moments along one realization.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{assemble_hamiltonian, enumerate_cube, sample_disorder, SsdSpec};
use crate::moments::{dos_moment, moment_polynomial, MomentValue, Volume};
use crate::parallel::pairwise_mean;
use crate::spectral::{eigenvalues, EigenDecomposition};

/// Uniform probability measure on a finite list of points.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    points: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|x| x.is_nan()) {
            return Err(Error::invalid("empirical distribution points must not be NaN"));
        }
        points.sort_by(f64::total_cmp);
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of points `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.partition_point(|&p| p <= x) as f64 / self.points.len() as f64
    }

    /// `∫ x^k dν`.
    pub fn moment(&self, k: u32) -> f64 {
        let v: Vec<f64> = self.points.iter().map(|x| x.powi(k as i32)).collect();
        pairwise_mean(&v)
    }
}

/// `ν^ω_L`: eigenvalues of `H^ω_L` with weights `1/|Λ_L|`.
pub fn empirical_ids(dec: &EigenDecomposition) -> EmpiricalDistribution {
    EmpiricalDistribution::new(dec.eigenvalues().to_vec()).expect("eigenvalues are finite")
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdsMomentRow {
    pub half_side: usize,
    pub value: f64,
    /// `|value − m_k|`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdsConvergence {
    pub k: usize,
    pub oracle: MomentValue,
    pub rows: Vec<IdsMomentRow>,
}

/// `∫ x^k dν^ω_L` for each `L` in `grid`, all cubes cut from one nested realization.
pub fn ids_moment_convergence(
    dim: usize,
    ssd: &SsdSpec,
    k: usize,
    grid: &[usize],
    master_seed: u64,
) -> Result<IdsConvergence> {
    let wp = moment_polynomial(dim, k, &vec![0; dim], Volume::Infinite)?;
    let oracle = dos_moment(&wp, ssd)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &l in grid {
        let cube = Arc::new(enumerate_cube(dim, l)?);
        let field = sample_disorder(ssd, cube.clone(), master_seed, 0)?;
        let h = assemble_hamiltonian(&cube, &field)?;
        let ev = EmpiricalDistribution::new(eigenvalues(h.matrix())?)?;
        let value = ev.moment(k as u32);
        rows.push(IdsMomentRow {
            half_side: l,
            value,
            distance: (value - oracle.value).abs(),
        });
    }
    Ok(IdsConvergence { k, oracle, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{spectrum_support, DisorderField, SpectrumSupport};
    use crate::spectral::eig_sym;

    #[test]
    fn three_site_free_chain() {
        let c = Arc::new(enumerate_cube(1, 1).unwrap());
        let h = assemble_hamiltonian(&c, &DisorderField::constant(c.clone(), 0.0)).unwrap();
        let ids = empirical_ids(&eig_sym(&h).unwrap());
        let r = 2f64.sqrt();
        let eps = 1e-9;
        assert!((ids.cdf(-r - eps) - 0.0).abs() < 1e-15);
        assert!((ids.cdf(-r + eps) - 1.0 / 3.0).abs() < 1e-15);
        assert!((ids.cdf(eps) - 2.0 / 3.0).abs() < 1e-15);
        assert!((ids.cdf(r + eps) - 1.0).abs() < 1e-15);
        assert_eq!(ids.cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(ids.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn mass_inside_spectrum_support() {
        let ssd = SsdSpec::Uniform { lo: -2.0, hi: 3.0 };
        let c = Arc::new(enumerate_cube(2, 4).unwrap());
        let h = assemble_hamiltonian(&c, &sample_disorder(&ssd, c.clone(), 1, 0).unwrap()).unwrap();
        let ids = empirical_ids(&eig_sym(&h).unwrap());
        let SpectrumSupport::Interval(lo, hi) = spectrum_support(&ssd, 2) else {
            panic!("bounded SSD")
        };
        assert_eq!(ids.cdf(lo - 1e-12), 0.0);
        assert_eq!(ids.cdf(hi), 1.0);
    }

    #[test]
    fn moment_sequence_along_one_realization() {
        let r = SsdSpec::rademacher();
        let grid = [25usize, 100, 400];
        let k0 = ids_moment_convergence(1, &r, 0, &grid, 3).unwrap();
        assert!(k0.rows.iter().all(|row| row.value == 1.0));
        let k1 = ids_moment_convergence(1, &r, 1, &grid, 3).unwrap();
        for row in &k1.rows {
            assert!(row.value.abs() <= 5.0 / ((2 * row.half_side + 1) as f64).sqrt());
        }
        let k2 = ids_moment_convergence(1, &r, 2, &grid, 3).unwrap();
        assert_eq!(k2.oracle.value, 3.0);
        // ω² ≡ 1 for Rademacher: the only defect is the boundary, 2/(2L+1)
        for row in &k2.rows {
            assert!((row.distance - 2.0 / (2 * row.half_side + 1) as f64).abs() < 1e-10);
        }
        assert!(k2.rows.windows(2).all(|w| w[1].distance < w[0].distance));
    }
}
