//! Exact expansion of `⟨δ_n, H^k δ_n⟩` as an integer polynomial in the site variables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::cube::l1_distance;
use crate::model::DisorderField;
use crate::parallel::CompensatedSum;

/// Default cap on `(2d+1)^k`, i.e. `k ≤ 8` for `d ≤ 3`.
pub const DEFAULT_WALK_BUDGET: u128 = 5_764_801;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Volume {
    Infinite,
    /// The cube `Λ_L`; walks may not leave it.
    Finite(usize),
}

impl fmt::Display for Volume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Volume::Infinite => write!(f, "infinite"),
            Volume::Finite(l) => write!(f, "L={l}"),
        }
    }
}

/// Canonical monomial `Π ω_{s}^{j_s}`: pairs `(site, exponent ≥ 1)` sorted by site.
pub type Monomial = Vec<(Vec<i32>, u32)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPolynomial {
    dim: usize,
    k: usize,
    base: Vec<i32>,
    volume: Volume,
    terms: BTreeMap<Monomial, u128>,
}

impl WalkPolynomial {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn base(&self) -> &[i32] {
        &self.base
    }

    pub fn volume(&self) -> Volume {
        self.volume
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, u128> {
        &self.terms
    }

    pub fn coefficient(&self, monomial: &Monomial) -> u128 {
        self.terms.get(monomial).copied().unwrap_or(0)
    }

    /// Exponent of `ω_n` at the base site in a monomial (0 if absent).
    pub fn base_exponent(&self, monomial: &Monomial) -> u32 {
        monomial
            .iter()
            .find(|(s, _)| *s == self.base)
            .map_or(0, |(_, j)| *j)
    }

    /// Value at `ω ≡ 1`, i.e. `⟨δ_n, (Δ + I)^k δ_n⟩`.
    pub fn value_at_ones(&self) -> u128 {
        self.terms.values().sum()
    }

    /// Evaluates with `ω_s = value(s)`.
    pub fn evaluate(&self, value: impl Fn(&[i32]) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (mono, &c) in &self.terms {
            let prod: f64 = mono.iter().map(|(s, j)| value(s).powi(*j as i32)).product();
            acc.add(c as f64 * prod);
        }
        acc.value()
    }

    /// Evaluates on a sampled field; every site of the polynomial must lie in its cube.
    pub fn evaluate_field(&self, field: &DisorderField) -> Result<f64> {
        for mono in self.terms.keys() {
            for (s, _) in mono {
                if !field.cube().contains(s) {
                    return Err(Error::SiteOutsideCube(s.clone()));
                }
            }
        }
        Ok(self.evaluate(|s| field.value_at(s).expect("checked above")))
    }

    /// Same polynomial with every site (and the base) shifted by `shift`.
    pub fn translated(&self, shift: &[i32]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: shift.len(),
            });
        }
        if self.volume != Volume::Infinite {
            return Err(Error::invalid("only infinite-volume walk polynomials can be translated"));
        }
        let add = |s: &[i32]| s.iter().zip(shift).map(|(a, b)| a + b).collect::<Vec<i32>>();
        Ok(Self {
            dim: self.dim,
            k: self.k,
            base: add(&self.base),
            volume: self.volume,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.iter().map(|(s, j)| (add(s), *j)).collect(), c))
                .collect(),
        })
    }
}

impl fmt::Display for WalkPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mono, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mono.is_empty() {
                write!(f, "{c}")?;
                continue;
            }
            if *c != 1 {
                write!(f, "{c}")?;
            }
            for (s, j) in mono {
                let idx: Vec<String> = s.iter().map(i32::to_string).collect();
                write!(f, "w[{}]", idx.join(","))?;
                if *j > 1 {
                    write!(f, "^{j}")?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

pub fn moment_polynomial(dim: usize, k: usize, base: &[i32], volume: Volume) -> Result<WalkPolynomial> {
    moment_polynomial_with_budget(dim, k, base, volume, DEFAULT_WALK_BUDGET)
}

/// Expands `⟨δ_n, H^k δ_n⟩` by applying `H = Δ + V` step by step, tracking the
/// current site and the accumulated diagonal factors; like states are merged.
pub fn moment_polynomial_with_budget(
    dim: usize,
    k: usize,
    base: &[i32],
    volume: Volume,
    budget: u128,
) -> Result<WalkPolynomial> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if base.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: base.len(),
        });
    }
    let states = (2 * dim as u128 + 1).checked_pow(k as u32).unwrap_or(u128::MAX);
    if states > budget {
        return Err(Error::WalkBudget { states, budget });
    }
    let inside = |s: &[i32]| match volume {
        Volume::Infinite => true,
        Volume::Finite(l) => s.iter().all(|c| c.unsigned_abs() as usize <= l),
    };
    if !inside(base) {
        return Err(Error::SiteOutsideCube(base.to_vec()));
    }

    let mut layer: HashMap<(Vec<i32>, Monomial), u128> = HashMap::new();
    layer.insert((base.to_vec(), Vec::new()), 1);
    for step in 0..k {
        let remaining = (k - step - 1) as u64;
        let mut next: HashMap<(Vec<i32>, Monomial), u128> = HashMap::with_capacity(layer.len() * 2);
        for ((site, mono), c) in layer {
            // diagonal factor ω_site
            if l1_distance(&site, base) <= remaining {
                let m = multiply(&mono, &site);
                *next.entry((site.clone(), m)).or_insert(0) += c;
            }
            for axis in 0..dim {
                for delta in [-1, 1] {
                    let mut nb = site.clone();
                    nb[axis] += delta;
                    if inside(&nb) && l1_distance(&nb, base) <= remaining {
                        *next.entry((nb, mono.clone())).or_insert(0) += c;
                    }
                }
            }
        }
        layer = next;
    }
    let mut terms = BTreeMap::new();
    for ((site, mono), c) in layer {
        debug_assert_eq!(site, base);
        *terms.entry(mono).or_insert(0) += c;
    }
    Ok(WalkPolynomial {
        dim,
        k,
        base: base.to_vec(),
        volume,
        terms,
    })
}

fn multiply(mono: &Monomial, site: &[i32]) -> Monomial {
    let mut out = mono.clone();
    match out.binary_search_by(|(s, _)| s.as_slice().cmp(site)) {
        Ok(i) => out[i].1 += 1,
        Err(i) => out.insert(i, (site.to_vec(), 1)),
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::{assemble_hamiltonian, enumerate_cube, interior_cube, sample_disorder, SsdSpec};
    use crate::spectral::{eig_sym, spectral_diagonal};
    use proptest::prelude::*;

    fn mono(pairs: &[(i32, u32)]) -> Monomial {
        pairs.iter().map(|&(s, j)| (vec![s], j)).collect()
    }

    #[test]
    fn low_order_cases() {
        let p0 = moment_polynomial(2, 0, &[0, 0], Volume::Infinite).unwrap();
        assert_eq!(p0.terms().len(), 1);
        assert_eq!(p0.coefficient(&vec![]), 1);
        let p1 = moment_polynomial(1, 1, &[0], Volume::Infinite).unwrap();
        assert_eq!(p1.terms().len(), 1);
        assert_eq!(p1.coefficient(&mono(&[(0, 1)])), 1);
    }

    #[test]
    fn second_and_third_order_in_one_dimension() {
        let p2 = moment_polynomial(1, 2, &[0], Volume::Infinite).unwrap();
        assert_eq!(p2.terms().len(), 2);
        assert_eq!(p2.coefficient(&mono(&[(0, 2)])), 1);
        assert_eq!(p2.coefficient(&vec![]), 2);

        let p3 = moment_polynomial(1, 3, &[0], Volume::Infinite).unwrap();
        assert_eq!(p3.terms().len(), 4);
        assert_eq!(p3.coefficient(&mono(&[(0, 3)])), 1);
        assert_eq!(p3.coefficient(&mono(&[(0, 1)])), 4);
        assert_eq!(p3.coefficient(&mono(&[(1, 1)])), 1);
        assert_eq!(p3.coefficient(&mono(&[(-1, 1)])), 1);
    }

    #[test]
    fn fourth_order_free_walks() {
        // returning walks of length 4 on ℤ: C(4,2) = 6
        let p4 = moment_polynomial(1, 4, &[0], Volume::Infinite).unwrap();
        assert_eq!(p4.coefficient(&vec![]), 6);
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(
            moment_polynomial(3, 9, &[0, 0, 0], Volume::Infinite),
            Err(Error::WalkBudget { .. })
        ));
        assert!(moment_polynomial(3, 8, &[0, 0, 0], Volume::Finite(1)).is_ok());
        assert!(matches!(
            moment_polynomial(1, 2, &[3], Volume::Finite(2)),
            Err(Error::SiteOutsideCube(_))
        ));
    }

    #[test]
    fn ones_evaluation_matches_shifted_laplacian() {
        for (d, k) in [(1usize, 6usize), (2, 5), (3, 3)] {
            let p = moment_polynomial(d, k, &vec![0; d], Volume::Infinite).unwrap();
            let c = Arc::new(enumerate_cube(d, k + 1).unwrap());
            let field = crate::model::DisorderField::constant(c.clone(), 1.0);
            let h = assemble_hamiltonian(&c, &field).unwrap();
            let dec = eig_sym(&h).unwrap();
            let centre = c.index_of(&vec![0; d]).unwrap();
            let numeric = spectral_diagonal(&dec, &|x: f64| x.powi(k as i32), centre);
            let exact = p.value_at_ones();
            assert!((numeric - exact as f64).abs() < 1e-8 * exact as f64, "d={d} k={k}");
            assert!(exact <= (2 * d as u128 + 1).pow(k as u32));
        }
    }

    #[test]
    fn numeric_agreement_on_sampled_fields() {
        for (d, l, k) in [(1usize, 8usize, 6usize), (2, 3, 4)] {
            let c = Arc::new(enumerate_cube(d, l).unwrap());
            for seed in 0..3 {
                let field = sample_disorder(&SsdSpec::Uniform { lo: -1.5, hi: 1.5 }, c.clone(), seed, 0).unwrap();
                let dec = eig_sym(&assemble_hamiltonian(&c, &field).unwrap()).unwrap();
                for &n in &interior_cube(&c, k / 2) {
                    let p = moment_polynomial(d, k, c.site(n), Volume::Infinite).unwrap();
                    let a = p.evaluate_field(&field).unwrap();
                    let b = spectral_diagonal(&dec, &|x: f64| x.powi(k as i32), n);
                    assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()));
                }
            }
        }
    }

    #[test]
    fn finite_volume_dominated_and_equal_in_interior() {
        let (d, l, k) = (1usize, 3usize, 4usize);
        let c = enumerate_cube(d, l).unwrap();
        let interior = interior_cube(&c, k);
        for n in 0..c.len() {
            let fin = moment_polynomial(d, k, c.site(n), Volume::Finite(l)).unwrap();
            let inf = moment_polynomial(d, k, c.site(n), Volume::Infinite).unwrap();
            for (m, &cf) in fin.terms() {
                assert!(cf <= inf.coefficient(m));
            }
            if interior.contains(&n) {
                assert_eq!(fin.terms(), inf.terms());
            }
        }
        // at the corner of Λ_1 in d=1 the free count 2 drops to 1
        let corner = moment_polynomial(1, 2, &[1], Volume::Finite(1)).unwrap();
        assert_eq!(corner.coefficient(&vec![]), 1);
    }

    #[test]
    fn display_form() {
        let p3 = moment_polynomial(1, 3, &[0], Volume::Infinite).unwrap();
        let s = p3.to_string();
        assert!(s.contains("w[0]^3") && s.contains("4w[0]"));
    }

    proptest! {
        #[test]
        fn translation_invariance(d in 1usize..3, k in 0usize..6, x in -5i32..5, y in -5i32..5) {
            let shift: Vec<i32> = [x, y][..d].to_vec();
            let origin = moment_polynomial(d, k, &vec![0; d], Volume::Infinite).unwrap();
            let at = moment_polynomial(d, k, &shift, Volume::Infinite).unwrap();
            prop_assert_eq!(origin.translated(&shift).unwrap(), at);
        }

        #[test]
        fn structural_invariants(d in 1usize..3, k in 0usize..7) {
            let p = moment_polynomial(d, k, &vec![0; d], Volume::Infinite).unwrap();
            for (m, &c) in p.terms() {
                prop_assert!(c > 0);
                let deg: u32 = m.iter().map(|(_, j)| j).sum();
                prop_assert!(deg as usize <= k);
                for (s, _) in m {
                    prop_assert!(crate::model::cube::l1_norm(s) as usize <= k);
                }
                prop_assert!(m.windows(2).all(|w| w[0].0 < w[1].0));
            }
        }
    }
}
