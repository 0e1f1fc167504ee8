//! Exact expectations over two-point disorder by enumerating every configuration
//! of a small box: variances, Doob martingale differences along the site
//! order, the directional half-space recursion, and both sides of the
//! finite-volume variance bound.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::trace::TracePolynomial;
use crate::error::{Error, Result};
use crate::functions::{Polynomial, TestFunction};
use crate::measures::polynomial_norm_exact_finite;
use crate::model::{hamiltonian_from_potential, LatticeCube, SsdSpec};
use crate::moments::MomentValue;
use crate::parallel::{try_ordered_map, CompensatedSum};
use crate::spectral::{diagonal_from_weights, eigenvalues, site_weights, trace_of};

/// Largest box the engine accepts.
pub const MAX_ENUMERATION_SITES: usize = 20;

/// All `2^{|Λ|}` configurations of a two-point SSD on a cube.
///
/// Configuration `c` puts the second atom at site `i` iff bit `i` of `c` is set.
/// Tables are `Vec<f64>` indexed by configuration.
#[derive(Debug, Clone)]
pub struct EnumerationEngine {
    cube: Arc<LatticeCube>,
    ssd: SsdSpec,
    values: [f64; 2],
    probs: [f64; 2],
    exact_probs: [BigRational; 2],
    weights: Vec<f64>,
}

impl EnumerationEngine {
    pub fn new(cube: Arc<LatticeCube>, ssd: &SsdSpec) -> Result<Self> {
        ssd.validate()?;
        let atoms = ssd
            .atoms()
            .ok_or_else(|| Error::invalid(format!("enumeration needs a two-point SSD, got {ssd}")))?;
        if cube.len() > MAX_ENUMERATION_SITES {
            return Err(Error::EnumerationBudget {
                sites: cube.len(),
                limit: MAX_ENUMERATION_SITES,
            });
        }
        let [(a, pa), (b, pb)] = atoms;
        let probs = [ratio_f64(&pa), ratio_f64(&pb)];
        let n = cube.len();
        let weights = (0..1usize << n)
            .map(|c| (0..n).map(|i| probs[(c >> i) & 1]).product())
            .collect();
        Ok(Self {
            cube,
            ssd: *ssd,
            values: [a, b],
            probs,
            exact_probs: [pa, pb],
            weights,
        })
    }

    pub fn cube(&self) -> &Arc<LatticeCube> {
        &self.cube
    }

    pub fn ssd(&self) -> &SsdSpec {
        &self.ssd
    }

    pub fn sites(&self) -> usize {
        self.cube.len()
    }

    pub fn configurations(&self) -> usize {
        1 << self.cube.len()
    }

    /// `P(c)` for each configuration.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_c P(c)` in exact arithmetic, grouped by the number of second atoms.
    pub fn probability_sum_exact(&self) -> BigRational {
        let n = self.sites();
        let mut total = BigRational::zero();
        let mut binom = BigInt::one();
        for j in 0..=n {
            if j > 0 {
                binom = binom * BigInt::from(n - j + 1) / BigInt::from(j);
            }
            total += BigRational::from_integer(binom.clone())
                * pow(&self.exact_probs[0], (n - j) as u32)
                * pow(&self.exact_probs[1], j as u32);
        }
        total
    }

    pub fn potential(&self, config: usize) -> Vec<f64> {
        (0..self.sites()).map(|i| self.values[(config >> i) & 1]).collect()
    }

    /// `Ψ(c) = Tr f(H(c))` for every configuration.
    pub fn psi_table(&self, f: &TestFunction) -> Result<Vec<f64>> {
        let plan = match f.as_polynomial() {
            Some(p) => TracePolynomial::build(&self.cube, p)?,
            None => None,
        };
        try_ordered_map(self.configurations(), |c| {
            let v = self.potential(c);
            match &plan {
                Some(tp) => Ok(tp.evaluate(&v)),
                None => {
                    let h = hamiltonian_from_potential(&self.cube, &v);
                    Ok(trace_of(&eigenvalues(h.matrix())?, f))
                }
            }
        })
    }

    /// `E(T)`.
    pub fn expectation(&self, table: &[f64]) -> f64 {
        table.iter().zip(&self.weights).map(|(t, w)| t * w).collect::<CompensatedSum>().value()
    }

    /// `E(T | σ(ω_i : keep[i]))` as a table over configurations.
    pub fn conditional(&self, table: &[f64], keep: &[bool]) -> Vec<f64> {
        let mut out = table.to_vec();
        for (i, &k) in keep.iter().enumerate() {
            if !k {
                self.marginalize(&mut out, i);
            }
        }
        out
    }

    fn marginalize(&self, table: &mut [f64], site: usize) {
        let bit = 1usize << site;
        for c in 0..table.len() {
            if c & bit == 0 {
                let v = self.probs[0] * table[c] + self.probs[1] * table[c | bit];
                table[c] = v;
                table[c | bit] = v;
            }
        }
    }
}

fn ratio_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

fn pow(q: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactVariance {
    pub mean: f64,
    /// `Var(Tr f(H_L))`.
    pub variance: f64,
    /// `E|X_{f,L}|² = Var(Tr f(H_L)) / |Λ_L|`.
    pub per_site: f64,
}

pub fn exact_variance(engine: &EnumerationEngine, f: &TestFunction) -> Result<ExactVariance> {
    let psi = engine.psi_table(f)?;
    Ok(variance_of(engine, &psi))
}

fn variance_of(engine: &EnumerationEngine, psi: &[f64]) -> ExactVariance {
    let mean = engine.expectation(psi);
    let sq: Vec<f64> = psi.iter().map(|v| (v - mean) * (v - mean)).collect();
    let variance = engine.expectation(&sq);
    ExactVariance {
        mean,
        variance,
        per_site: variance / engine.sites() as f64,
    }
}

/// Order in which coordinates are revealed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiltrationPlan {
    /// `G_k = σ(ω_{order[0]}, …, ω_{order[k−1]})`.
    SiteOrder(Vec<usize>),
    /// Half-spaces `A^m_k = {n : n_m ≤ k}` along the listed axes, in order.
    Directional(Vec<usize>),
}

impl FiltrationPlan {
    /// The canonical (lexicographic) site enumeration of the cube.
    pub fn site_order(cube: &LatticeCube) -> Self {
        FiltrationPlan::SiteOrder((0..cube.len()).collect())
    }

    /// Axes `1, …, d` in order.
    pub fn directional(dim: usize) -> Self {
        FiltrationPlan::Directional((0..dim).collect())
    }

    pub fn validate(&self, cube: &LatticeCube) -> Result<()> {
        match self {
            FiltrationPlan::SiteOrder(order) => {
                let mut seen = vec![false; cube.len()];
                for &i in order {
                    if i >= cube.len() || std::mem::replace(&mut seen[i], true) {
                        return Err(Error::invalid(format!("site order is not a permutation: index {i}")));
                    }
                }
                if order.len() != cube.len() {
                    return Err(Error::invalid("site order must list every site of the cube"));
                }
            }
            FiltrationPlan::Directional(axes) => {
                if axes.iter().any(|&a| a >= cube.dim()) {
                    return Err(Error::invalid(format!("axis out of range in {axes:?}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub variance: f64,
    /// `E(D_k²)` in filtration order.
    pub second_moments: Vec<f64>,
    pub sum_of_squares: f64,
    /// `|Var(Ψ) − Σ_k E(D_k²)|`.
    pub identity_error: f64,
    /// `max_{i≠j} |E(D_i D_j)|`.
    pub max_cross_term: f64,
    /// `max_c |Σ_k D_k(c) − (Ψ(c) − EΨ)|`.
    pub reconstruction_error: f64,
}

impl MartingaleReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.identity_error <= tol && self.max_cross_term <= tol && self.reconstruction_error <= tol
    }
}

#[derive(Debug, Clone)]
pub struct MartingaleDecomposition {
    /// `D_k = E(Ψ|G_k) − E(Ψ|G_{k−1})`, `k = 1..=|Λ|`.
    pub differences: Vec<Vec<f64>>,
    pub report: MartingaleReport,
}

pub fn martingale_decomposition(
    engine: &EnumerationEngine,
    f: &TestFunction,
    plan: &FiltrationPlan,
) -> Result<MartingaleDecomposition> {
    plan.validate(engine.cube())?;
    let FiltrationPlan::SiteOrder(order) = plan else {
        return Err(Error::invalid("martingale decomposition needs a site-order plan"));
    };
    let psi = engine.psi_table(f)?;
    let var = variance_of(engine, &psi);

    // levels[k] = E(Ψ | G_k), obtained by integrating out the last sites first
    let n = order.len();
    let mut levels = vec![psi.clone()];
    for k in (0..n).rev() {
        let mut next = levels.last().unwrap().clone();
        engine.marginalize(&mut next, order[k]);
        levels.push(next);
    }
    levels.reverse();
    let differences: Vec<Vec<f64>> = (1..=n)
        .map(|k| levels[k].iter().zip(&levels[k - 1]).map(|(a, b)| a - b).collect())
        .collect();

    let mut second_moments = Vec::with_capacity(n);
    let mut max_cross: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let prod: Vec<f64> = differences[i].iter().zip(&differences[j]).map(|(a, b)| a * b).collect();
            let e = engine.expectation(&prod);
            if i == j {
                second_moments.push(e);
            } else {
                max_cross = max_cross.max(e.abs());
            }
        }
    }
    let sum_of_squares = second_moments.iter().copied().collect::<CompensatedSum>().value();
    let reconstruction_error = (0..psi.len())
        .map(|c| {
            let s: f64 = differences.iter().map(|d| d[c]).collect::<CompensatedSum>().value();
            (s - (psi[c] - var.mean)).abs()
        })
        .fold(0.0, f64::max);
    Ok(MartingaleDecomposition {
        differences,
        report: MartingaleReport {
            variance: var.variance,
            identity_error: (var.variance - sum_of_squares).abs(),
            second_moments,
            sum_of_squares,
            max_cross_term: max_cross,
            reconstruction_error,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalReport {
    pub degree: usize,
    /// `2L − 2p + 1`.
    pub slab_count: i64,
    pub variance: f64,
    /// `E(Ψ²_{L,1..m})` for `m = 1..=d`.
    pub second_moments: Vec<f64>,
    /// `Var(Ψ_{L,1..m−1}) − (2L−2p+1)·E(Ψ²_{L,1..m})` for each depth.
    pub step_margins: Vec<f64>,
    /// `Var(Ψ_L) − (2L−2p+1)^d · E(Ψ²_{L,1..d})`.
    pub margin: f64,
}

impl DirectionalReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.margin >= -tol && self.step_margins.iter().all(|&m| m >= -tol)
    }
}

/// Tables of the recursion `Ψ_{L,1..m} = E(Ψ_{L,1..m−1} | F^m_1) − E(Ψ_{L,1..m−1} | F^m_0)`
/// together with the check `Var(Ψ_L) ≥ (2L−2p+1)^d E(Ψ²_{L,1..d})`.
pub fn directional_decomposition(
    engine: &EnumerationEngine,
    poly: &Polynomial,
    plan: &FiltrationPlan,
) -> Result<(Vec<Vec<f64>>, DirectionalReport)> {
    plan.validate(engine.cube())?;
    let FiltrationPlan::Directional(axes) = plan else {
        return Err(Error::invalid("directional decomposition needs a directional plan"));
    };
    let p = poly.degree();
    if p < 1 {
        return Err(Error::invalid("directional lower bound needs a polynomial of degree ≥ 1"));
    }
    let l = engine.cube().half_side();
    if l < p {
        return Err(Error::invalid(format!(
            "directional lower bound needs L ≥ p (2L − 2p + 1 ≥ 1), got L = {l}, p = {p}"
        )));
    }
    let psi = engine.psi_table(&TestFunction::Polynomial(poly.clone()))?;
    let var = variance_of(engine, &psi);
    let half_space = |axis: usize, level: i32| -> Vec<bool> {
        engine.cube().sites().iter().map(|s| s[axis] <= level).collect()
    };

    let slab_count = (2 * l - 2 * p + 1) as i64;
    let mut tables = Vec::with_capacity(axes.len());
    let mut second_moments = Vec::with_capacity(axes.len());
    let mut step_margins = Vec::with_capacity(axes.len());
    let mut current = psi;
    let mut prev_var = var.variance;
    for &axis in axes {
        let upper = engine.conditional(&current, &half_space(axis, 1));
        let lower = engine.conditional(&current, &half_space(axis, 0));
        let next: Vec<f64> = upper.iter().zip(&lower).map(|(a, b)| a - b).collect();
        let sq: Vec<f64> = next.iter().map(|v| v * v).collect();
        let m2 = engine.expectation(&sq);
        step_margins.push(prev_var - slab_count as f64 * m2);
        second_moments.push(m2);
        // E(Ψ_{L,1..m}) = 0, so its variance is its second moment
        prev_var = m2;
        tables.push(next.clone());
        current = next;
    }
    let depth_factor = (slab_count as f64).powi(axes.len() as i32);
    let margin = var.variance - depth_factor * second_moments.last().copied().unwrap_or(0.0);
    Ok((
        tables,
        DirectionalReport {
            degree: p,
            slab_count,
            variance: var.variance,
            second_moments,
            step_margins,
            margin,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactBound {
    /// `E|X_{f,L}|²` by enumeration.
    pub lhs: f64,
    /// `8 ∫|f′|² dν̄_L` from finite-volume walk polynomials.
    pub rhs_walk: f64,
    /// The same right-hand side by enumeration and Gauss–Legendre integration in `u`.
    pub rhs_enumeration: f64,
    /// Exact rational form of `rhs_walk` when available.
    pub rhs_exact: Option<String>,
    /// `rhs_walk − lhs`.
    pub margin: f64,
}

/// Both sides of `E|X_{f,L}|² ≤ 8 ∫|f′|² dν̄_L` for a polynomial `f`.
pub fn variance_bound_exact(engine: &EnumerationEngine, f: &Polynomial) -> Result<ExactBound> {
    let lhs = exact_variance(engine, &TestFunction::Polynomial(f.clone()))?.per_site;
    let fp = f.derivative();
    let cube = engine.cube();
    let walk: MomentValue = polynomial_norm_exact_finite(&fp, cube.dim(), cube.half_side(), engine.ssd(), 1)?;
    let rhs_walk = 8.0 * walk.value;

    // ⟨δ_n, |f′|²(H|_{ω_n→uω_n}) δ_n⟩ is a polynomial in u of degree ≤ 2 deg f′
    let g = fp.mul(&fp);
    let (nodes, gw) = gauss_legendre_unit(g.degree() / 2 + 1);
    let n = engine.sites();
    let per_config = try_ordered_map(engine.configurations(), |c| {
        let v = engine.potential(c);
        let mut acc = CompensatedSum::new();
        for site in 0..n {
            let mut integral = CompensatedSum::new();
            for (&u, &w) in nodes.iter().zip(&gw) {
                let mut scaled = v.clone();
                scaled[site] *= u;
                let h = hamiltonian_from_potential(cube, &scaled);
                let sw = site_weights(h.matrix(), &[site])?;
                integral.add(w * diagonal_from_weights(&sw.eigenvalues, &sw.weights[0], &g));
            }
            acc.add(v[site] * v[site] * integral.value());
        }
        Ok(acc.value() / n as f64)
    })?;
    let rhs_enumeration = 8.0 * engine.expectation(&per_config);
    Ok(ExactBound {
        lhs,
        rhs_walk,
        rhs_enumeration,
        rhs_exact: walk.exact.map(|q| (q * BigRational::from_integer(BigInt::from(8))).to_string()),
        margin: rhs_walk - lhs,
    })
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    for i in 0..q {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::catalog::lookup;
    use crate::model::enumerate_cube;

    fn engine(d: usize, l: usize) -> EnumerationEngine {
        EnumerationEngine::new(Arc::new(enumerate_cube(d, l).unwrap()), &SsdSpec::rademacher()).unwrap()
    }

    fn poly(k: usize) -> TestFunction {
        TestFunction::Polynomial(Polynomial::monomial(k, 1.0))
    }

    #[test]
    fn probabilities_sum_to_one() {
        let e = engine(1, 2);
        assert_eq!(e.configurations(), 32);
        assert_eq!(e.probability_sum_exact(), BigRational::one());
        let skew = EnumerationEngine::new(
            Arc::new(enumerate_cube(1, 1).unwrap()),
            &SsdSpec::TwoPoint { a: 2.0, b: -0.5, prob_a: 0.3 },
        )
        .unwrap();
        assert_eq!(skew.probability_sum_exact(), BigRational::one());
        assert!((skew.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn budget_and_family_guards() {
        let big = Arc::new(enumerate_cube(2, 2).unwrap());
        assert!(matches!(
            EnumerationEngine::new(big, &SsdSpec::rademacher()),
            Err(Error::EnumerationBudget { sites: 25, .. })
        ));
        let c = Arc::new(enumerate_cube(1, 1).unwrap());
        assert!(EnumerationEngine::new(c, &SsdSpec::Uniform { lo: 0.0, hi: 1.0 }).is_err());
    }

    #[test]
    fn exact_variance_examples() {
        let e = engine(1, 2);
        let lin = exact_variance(&e, &poly(1)).unwrap();
        assert!((lin.per_site - 1.0).abs() < 1e-14 && lin.mean.abs() < 1e-14);
        assert_eq!(exact_variance(&e, &poly(2)).unwrap().variance, 0.0);
        assert!(exact_variance(&e, &poly(3)).unwrap().variance > 0.0);
    }

    #[test]
    fn cubic_variance_by_hand() {
        // d=1, L=1: Tr H³ = Σω³ + 3·Σ_n deg(n) ω_n, so with ω³ = ω: Σ_n (1 + 3 deg n) ω_n
        // coefficients 4, 7, 4 ⇒ Var = 16 + 49 + 16 = 81
        let e = engine(1, 1);
        assert!((exact_variance(&e, &poly(3)).unwrap().variance - 81.0).abs() < 1e-11);
    }

    #[test]
    fn martingale_identity_on_small_boxes() {
        let at = TestFunction::Smooth(lookup("arctan").unwrap());
        for (d, l) in [(1usize, 2usize), (2, 1)] {
            let e = engine(d, l);
            for f in [poly(1), poly(3), at.clone()] {
                let m = martingale_decomposition(&e, &f, &FiltrationPlan::site_order(e.cube())).unwrap();
                assert!(m.report.passes(1e-10), "{:?}", m.report);
                assert_eq!(m.differences.len(), e.sites());
            }
        }
        let e = engine(1, 2);
        let c = TestFunction::Polynomial(Polynomial::constant(4.0));
        let m = martingale_decomposition(&e, &c, &FiltrationPlan::site_order(e.cube())).unwrap();
        assert!(m.differences.iter().flatten().all(|&v| v == 0.0));
        let reversed = FiltrationPlan::SiteOrder((0..5).rev().collect());
        assert!(martingale_decomposition(&e, &poly(3), &reversed).unwrap().report.passes(1e-10));
        assert!(martingale_decomposition(&e, &poly(3), &FiltrationPlan::SiteOrder(vec![0, 0, 1, 2, 3])).is_err());
    }

    #[test]
    fn directional_bound_small_boxes() {
        let x = Polynomial::monomial(1, 1.0);
        let e = engine(1, 2);
        let (_, r) = directional_decomposition(&e, &x, &FiltrationPlan::directional(1)).unwrap();
        // Ψ = Σω: Var = 5, Ψ_{L,1} = ω_1 ⇒ E(Ψ²_{L,1}) = 1, factor 3
        assert!((r.variance - 5.0).abs() < 1e-12 && (r.second_moments[0] - 1.0).abs() < 1e-12);
        assert_eq!(r.slab_count, 3);
        assert!(r.passes(1e-10));

        let e = engine(2, 1);
        let (tables, r) = directional_decomposition(&e, &x, &FiltrationPlan::directional(2)).unwrap();
        assert_eq!(tables.len(), 2);
        assert!((r.second_moments[0] - 3.0).abs() < 1e-12);
        assert!((r.second_moments[1] - 1.0).abs() < 1e-12);
        assert!(r.passes(1e-10));

        assert!(directional_decomposition(&e, &Polynomial::constant(1.0), &FiltrationPlan::directional(2)).is_err());
        assert!(directional_decomposition(&e, &Polynomial::monomial(3, 1.0), &FiltrationPlan::directional(2)).is_err());
    }

    #[test]
    fn variance_bound_two_routes_agree() {
        for (d, l) in [(1usize, 2usize), (2, 1)] {
            let e = engine(d, l);
            for f in [Polynomial::monomial(1, 1.0), Polynomial::monomial(3, 1.0)] {
                let b = variance_bound_exact(&e, &f).unwrap();
                assert!((b.rhs_walk - b.rhs_enumeration).abs() < 1e-9 * b.rhs_walk.max(1.0), "{b:?}");
                assert!(b.margin >= -1e-10, "{b:?}");
            }
        }
        // f = x: E|X|² = 1 and 8∫1 dν̄_L = 8E(ω²) = 8
        let b = variance_bound_exact(&engine(1, 2), &Polynomial::monomial(1, 1.0)).unwrap();
        assert_eq!(b.rhs_exact.as_deref(), Some("8"));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for q in 1..8 {
            let (x, w) = gauss_legendre_unit(q);
            for k in 0..2 * q {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((s - 1.0 / (k + 1) as f64).abs() < 1e-13, "q={q} k={k}");
            }
        }
    }
}
