use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// Real polynomial `a_0 + a_1 x + … + a_N x^N`, dense ascending coefficients.
///
/// Trailing zero coefficients are trimmed, so the leading coefficient is
/// nonzero whenever the degree is at least one. The zero polynomial is `[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Polynomial {
    fn from(coeffs: Vec<f64>) -> Self {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c·x^k`.
    pub fn monomial(k: usize, c: f64) -> Self {
        let mut v = vec![0.0; k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Horner evaluation; the only evaluator used in the crate.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Primitive with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut v = Vec::with_capacity(self.coeffs.len() + 1);
        v.push(0.0);
        v.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        Self::new(v)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| alpha * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut v = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Self::new(v)
    }

    /// `p(α·x + β)`.
    pub fn compose_affine(&self, alpha: f64, beta: f64) -> Self {
        let lin = Polynomial::new(vec![beta, alpha]);
        self.coeffs
            .iter()
            .rev()
            .fold(Polynomial::zero(), |acc, &c| acc.mul(&lin).add(&Polynomial::constant(c)))
    }

    /// Coefficients at their exact binary values.
    pub fn to_exact(&self) -> Vec<BigRational> {
        self.coeffs
            .iter()
            .map(|&c| BigRational::from_float(c).expect("finite coefficient"))
            .collect()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}x"),
                _ => format!("{c}x^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn calculus_examples() {
        assert_eq!(
            Polynomial::monomial(2, 3.0).antiderivative(),
            Polynomial::monomial(3, 1.0)
        );
        assert_eq!(
            Polynomial::new(vec![0.0, -1.0, 0.0, 1.0]).derivative(),
            Polynomial::new(vec![-1.0, 0.0, 3.0])
        );
        assert_eq!(Polynomial::new(vec![1.0, 0.0, 1.0]).eval(2.0), 5.0);
    }

    #[test]
    fn trimming_and_zero() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::new(vec![]).is_zero());
        assert_eq!(Polynomial::constant(4.0).derivative(), Polynomial::zero());
        assert_eq!(Polynomial::zero().antiderivative(), Polynomial::zero());
    }

    #[test]
    fn affine_composition() {
        // (2x+1)^2 = 4x^2 + 4x + 1
        let sq = Polynomial::monomial(2, 1.0);
        assert_eq!(sq.compose_affine(2.0, 1.0), Polynomial::new(vec![1.0, 4.0, 4.0]));
    }

    proptest! {
        #[test]
        fn derivative_inverts_antiderivative(c in prop::collection::vec(-8i32..8, 1..8)) {
            let p = Polynomial::new(c.into_iter().map(f64::from).collect());
            let back = p.antiderivative().derivative();
            prop_assert_eq!(back.coeffs().len(), p.coeffs().len());
            for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            prop_assert_eq!(p.antiderivative().coeffs()[0], 0.0);
        }

        #[test]
        fn product_evaluates_pointwise(
            a in prop::collection::vec(-4i32..4, 1..5),
            b in prop::collection::vec(-4i32..4, 1..5),
            x in -3i32..3,
        ) {
            let pa = Polynomial::new(a.into_iter().map(f64::from).collect());
            let pb = Polynomial::new(b.into_iter().map(f64::from).collect());
            let x = f64::from(x);
            prop_assert_eq!(pa.mul(&pb).eval(x), pa.eval(x) * pb.eval(x));
        }
    }
}
