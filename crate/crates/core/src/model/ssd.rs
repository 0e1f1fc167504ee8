use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-site distribution `μ` of the i.i.d. potential values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SsdSpec {
    /// `P(ω = a) = prob_a`, `P(ω = b) = 1 − prob_a`.
    TwoPoint { a: f64, b: f64, prob_a: f64 },
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, std: f64 },
}

/// Constants `(C, a)` with `∫|x|^k dμ ≤ C·a^k·k^k` for every `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub c: f64,
    pub a: f64,
}

impl GrowthConstants {
    /// `C·a^k·k^k` with `0⁰ = 1`.
    pub fn bound(&self, k: u32) -> f64 {
        let kk = if k == 0 { 1.0 } else { (k as f64).powi(k as i32) };
        self.c * self.a.powi(k as i32) * kk
    }
}

impl SsdSpec {
    /// Symmetric Bernoulli on `{+1, −1}`.
    pub fn rademacher() -> Self {
        SsdSpec::TwoPoint {
            a: 1.0,
            b: -1.0,
            prob_a: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSsd(format!("{name} must be finite, got {x}")))
            }
        };
        match *self {
            SsdSpec::TwoPoint { a, b, prob_a } => {
                finite("a", a)?;
                finite("b", b)?;
                if a == b {
                    return Err(Error::InvalidSsd("two_point requires a != b".into()));
                }
                if !(prob_a > 0.0 && prob_a < 1.0) {
                    return Err(Error::InvalidSsd(format!(
                        "two_point requires 0 < prob_a < 1, got {prob_a}"
                    )));
                }
            }
            SsdSpec::Uniform { lo, hi } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                if lo >= hi {
                    return Err(Error::InvalidSsd(format!(
                        "uniform requires lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            SsdSpec::Gaussian { mean, std } => {
                finite("mean", mean)?;
                finite("std", std)?;
                if std <= 0.0 {
                    return Err(Error::InvalidSsd(format!(
                        "gaussian requires std > 0, got {std}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        self.to_string()
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, SsdSpec::Gaussian { .. })
    }

    /// Convex hull of the support, `None` when unbounded.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        match *self {
            SsdSpec::TwoPoint { a, b, .. } => Some((a.min(b), a.max(b))),
            SsdSpec::Uniform { lo, hi } => Some((lo, hi)),
            SsdSpec::Gaussian { .. } => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match *self {
            SsdSpec::TwoPoint { a, b, prob_a } => a == -b && prob_a == 0.5,
            SsdSpec::Uniform { lo, hi } => lo == -hi,
            SsdSpec::Gaussian { mean, .. } => mean == 0.0,
        }
    }

    /// Raw moment `E(ω^k)`.
    pub fn moment(&self, k: u32) -> f64 {
        match *self {
            SsdSpec::TwoPoint { a, b, prob_a } => {
                prob_a * a.powi(k as i32) + (1.0 - prob_a) * b.powi(k as i32)
            }
            SsdSpec::Uniform { lo, hi } => {
                let e = k as i32 + 1;
                (hi.powi(e) - lo.powi(e)) / ((k + 1) as f64 * (hi - lo))
            }
            SsdSpec::Gaussian { mean, std } => {
                // Σ_{j even} C(k,j) mean^{k-j} std^j (j-1)!!
                let mut total = 0.0;
                let mut binom = 1.0;
                let mut dfact = 1.0;
                for j in 0..=k {
                    if j > 0 {
                        binom = binom * (k - j + 1) as f64 / j as f64;
                    }
                    if j % 2 == 0 {
                        if j >= 2 {
                            dfact *= (j - 1) as f64;
                        }
                        total += binom
                            * mean.powi((k - j) as i32)
                            * std.powi(j as i32)
                            * dfact;
                    }
                }
                total
            }
        }
    }

    /// Exact rational `E(ω^k)` for the two-point and uniform families.
    ///
    /// Parameters are taken at their exact binary values.
    pub fn exact_moment(&self, k: u32) -> Option<BigRational> {
        match *self {
            SsdSpec::TwoPoint { a, b, prob_a } => {
                let a = BigRational::from_float(a)?;
                let b = BigRational::from_float(b)?;
                let p = BigRational::from_float(prob_a)?;
                let q = BigRational::one() - &p;
                Some(p * pow_rat(&a, k) + q * pow_rat(&b, k))
            }
            SsdSpec::Uniform { lo, hi } => {
                let lo = BigRational::from_float(lo)?;
                let hi = BigRational::from_float(hi)?;
                let num = pow_rat(&hi, k + 1) - pow_rat(&lo, k + 1);
                let den = BigRational::from_integer(BigInt::from(k + 1)) * (hi - lo);
                Some(num / den)
            }
            SsdSpec::Gaussian { .. } => None,
        }
    }

    /// `E|ω|^k`; exact except for the Gaussian with nonzero mean, where the
    /// convexity bound `2^{k-1}(|m|^k + s^k E|Z|^k)` is returned instead.
    pub fn abs_moment(&self, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        match *self {
            SsdSpec::TwoPoint { a, b, prob_a } => {
                prob_a * a.abs().powi(k as i32) + (1.0 - prob_a) * b.abs().powi(k as i32)
            }
            SsdSpec::Uniform { lo, hi } => {
                let e = k as i32 + 1;
                let num = if lo >= 0.0 {
                    hi.powi(e) - lo.powi(e)
                } else if hi <= 0.0 {
                    (-lo).powi(e) - (-hi).powi(e)
                } else {
                    hi.powi(e) + (-lo).powi(e)
                };
                num / ((k + 1) as f64 * (hi - lo))
            }
            SsdSpec::Gaussian { mean, std } => {
                let z = std_normal_abs_moment(k);
                if mean == 0.0 {
                    std.powi(k as i32) * z
                } else {
                    2f64.powi(k as i32 - 1) * (mean.abs().powi(k as i32) + std.powi(k as i32) * z)
                }
            }
        }
    }

    pub fn abs_moment_is_exact(&self) -> bool {
        !matches!(self, SsdSpec::Gaussian { mean, .. } if *mean != 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.moment(1);
        self.moment(2) - m * m
    }

    /// Declared growth certificate.
    pub fn growth_constants(&self) -> GrowthConstants {
        match *self {
            SsdSpec::TwoPoint { a, b, .. } => GrowthConstants {
                c: 1.0,
                a: a.abs().max(b.abs()).max(1.0),
            },
            SsdSpec::Uniform { lo, hi } => GrowthConstants {
                c: 1.0,
                a: lo.abs().max(hi.abs()).max(1.0),
            },
            SsdSpec::Gaussian { mean, std } => GrowthConstants {
                c: 1.0,
                a: 2.0 * std + mean.abs() + 1.0,
            },
        }
    }

    /// Maps two independent uniforms on `[0, 1)` to one draw from `μ`.
    pub fn sample_from_uniforms(&self, u1: f64, u2: f64) -> f64 {
        match *self {
            SsdSpec::TwoPoint { a, b, prob_a } => {
                if u1 < prob_a {
                    a
                } else {
                    b
                }
            }
            SsdSpec::Uniform { lo, hi } => lo + (hi - lo) * u1,
            SsdSpec::Gaussian { mean, std } => {
                let r = (-2.0 * (1.0 - u1).ln()).sqrt();
                mean + std * r * (std::f64::consts::TAU * u2).cos()
            }
        }
    }

    /// Atoms with their exact probabilities; only for the two-point family.
    pub fn atoms(&self) -> Option<[(f64, BigRational); 2]> {
        match *self {
            SsdSpec::TwoPoint { a, b, prob_a } => {
                let p = BigRational::from_float(prob_a)?;
                let q = BigRational::one() - &p;
                Some([(a, p), (b, q)])
            }
            _ => None,
        }
    }
}

impl fmt::Display for SsdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SsdSpec::TwoPoint { a, b, prob_a } => write!(f, "two_point({a},{b},{prob_a})"),
            SsdSpec::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
            SsdSpec::Gaussian { mean, std } => write!(f, "gaussian({mean},{std})"),
        }
    }
}

/// `E|Z|^k = 2^{k/2} Γ((k+1)/2) / √π` for a standard normal `Z`.
pub fn std_normal_abs_moment(k: u32) -> f64 {
    2f64.powf(k as f64 / 2.0) * libm::tgamma((k as f64 + 1.0) / 2.0)
        / std::f64::consts::PI.sqrt()
}

pub(crate) fn pow_rat(x: &BigRational, k: u32) -> BigRational {
    if k == 0 {
        return BigRational::one();
    }
    if x.is_zero() {
        return BigRational::zero();
    }
    let num = x.numer().abs().pow(k);
    let den = x.denom().pow(k);
    let r = BigRational::new(num, den);
    if x.is_negative() && k % 2 == 1 {
        -r
    } else {
        r
    }
}
