use std::sync::Arc;

use super::cube::LatticeCube;
use super::rng::{site_key, CounterStream, Purpose};
use super::ssd::SsdSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub master_seed: u64,
    pub replicate: u64,
    pub ssd: SsdSpec,
}

/// One realization `{ω_n}` of the potential on a cube, indexed like `cube.sites()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderField {
    cube: Arc<LatticeCube>,
    values: Vec<f64>,
    provenance: Option<Provenance>,
}

impl DisorderField {
    /// Wraps explicit values (enumeration, tests).
    pub fn from_values(cube: Arc<LatticeCube>, values: Vec<f64>) -> Result<Self> {
        if values.len() != cube.len() {
            return Err(Error::DimensionMismatch {
                expected: cube.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            cube,
            values,
            provenance: None,
        })
    }

    pub fn constant(cube: Arc<LatticeCube>, value: f64) -> Self {
        let values = vec![value; cube.len()];
        Self {
            cube,
            values,
            provenance: None,
        }
    }

    pub fn cube(&self) -> &Arc<LatticeCube> {
        &self.cube
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, site: &[i32]) -> Option<f64> {
        self.cube.index_of(site).map(|i| self.values[i])
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Replaces `ω_j` by `u·ω_j` for every site index in `sites`.
    pub fn scale_sites(&self, sites: &[usize], u: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::invalid(format!("scale factor {u} outside [0, 1]")));
        }
        let mut out = self.clone();
        for &j in sites {
            let v = out.values.get_mut(j).ok_or_else(|| {
                Error::invalid(format!("site index {j} outside cube of {} sites", self.cube.len()))
            })?;
            *v *= u;
        }
        Ok(out)
    }

    /// Coordinate-addressed form of [`DisorderField::scale_sites`].
    pub fn scale_site_coords(&self, sites: &[Vec<i32>], u: f64) -> Result<Self> {
        let idx = sites
            .iter()
            .map(|s| self.cube.index_of(s).ok_or_else(|| Error::SiteOutsideCube(s.clone())))
            .collect::<Result<Vec<_>>>()?;
        self.scale_sites(&idx, u)
    }
}

/// Draws `ω_n` for every site of `cube`.
///
/// The value at a site is a pure function of `(master_seed, replicate,
/// site coordinate, ssd)`. Because the key is the lattice coordinate, fields
/// sampled on nested cubes with the same seed agree on the smaller cube.
pub fn sample_disorder(
    ssd: &SsdSpec,
    cube: Arc<LatticeCube>,
    master_seed: u64,
    replicate: u64,
) -> Result<DisorderField> {
    ssd.validate()?;
    let mut stream = CounterStream::new(master_seed, replicate, Purpose::Disorder);
    let values = cube
        .sites()
        .iter()
        .map(|s| {
            let [u1, u2] = stream.uniforms(site_key(s));
            ssd.sample_from_uniforms(u1, u2)
        })
        .collect();
    Ok(DisorderField {
        cube,
        values,
        provenance: Some(Provenance {
            master_seed,
            replicate,
            ssd: *ssd,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cube::enumerate_cube;
    use crate::parallel::pairwise_mean;

    fn cube(d: usize, l: usize) -> Arc<LatticeCube> {
        Arc::new(enumerate_cube(d, l).unwrap())
    }

    #[test]
    fn rademacher_support() {
        let f = sample_disorder(&SsdSpec::rademacher(), cube(2, 5), 3, 0).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0 || v == -1.0));
        assert!(f.values().contains(&1.0));
        assert!(f.values().contains(&-1.0));
    }

    #[test]
    fn deterministic() {
        let ssd = SsdSpec::Gaussian { mean: 0.0, std: 1.0 };
        let a = sample_disorder(&ssd, cube(1, 40), 11, 5).unwrap();
        let b = sample_disorder(&ssd, cube(1, 40), 11, 5).unwrap();
        assert_eq!(a, b);
        let c = sample_disorder(&ssd, cube(1, 40), 11, 6).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn nested_cubes_agree() {
        let ssd = SsdSpec::Uniform { lo: -1.0, hi: 2.0 };
        let small = sample_disorder(&ssd, cube(2, 2), 9, 1).unwrap();
        let large = sample_disorder(&ssd, cube(2, 4), 9, 1).unwrap();
        for (i, s) in small.cube().sites().iter().enumerate() {
            assert_eq!(Some(small.values()[i]), large.value_at(s));
        }
    }

    #[test]
    fn uniform_mean_within_five_standard_errors() {
        let c = Arc::new(crate::model::cube::enumerate_cube_with_budget(1, 50_000, 200_000).unwrap());
        let f = sample_disorder(&SsdSpec::Uniform { lo: 0.0, hi: 1.0 }, c, 1, 0).unwrap();
        let n = f.values().len() as f64;
        assert!(n >= 1e5);
        let se = (1.0 / 12.0 / n).sqrt();
        assert!((pairwise_mean(f.values()) - 0.5).abs() < 5.0 * se);
    }

    #[test]
    fn scaling() {
        let f = sample_disorder(&SsdSpec::Uniform { lo: 1.0, hi: 2.0 }, cube(1, 3), 2, 0).unwrap();
        assert_eq!(f.scale_sites(&[0, 3], 1.0).unwrap(), f);
        let all: Vec<usize> = (0..7).collect();
        assert!(f.scale_sites(&all, 0.0).unwrap().values().iter().all(|&v| v == 0.0));
        let h = f.scale_sites(&[2], 0.5).unwrap();
        for i in 0..7 {
            let expect = if i == 2 { 0.5 * f.values()[i] } else { f.values()[i] };
            assert_eq!(h.values()[i], expect);
        }
        assert!(f.scale_sites(&[7], 0.5).is_err());
        assert!(matches!(
            f.scale_site_coords(&[vec![4]], 0.5),
            Err(Error::SiteOutsideCube(_))
        ));
    }
}
