//! Tail certificates: envelopes that dominate the omitted part of a sequence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{ln_one_minus_exp, ln_pow};
use crate::spaces::ExponentSequence;

/// Shape of an envelope g(j), j ≥ 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decay {
    /// g(j) = ρ^j
    Geometric { rho: f64 },
    /// g(j) = e^{rate·α_{j+1}}
    Exponential { rate: f64 },
}

/// |v_i| ≤ c·g(i − shift) for every index i the envelope covers.
///
/// Elements use an envelope for the indices at and beyond their stored
/// values; symbols use it globally with shift 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvelopeRepr", into = "EnvelopeRepr")]
pub struct Envelope {
    pub c: f64,
    pub decay: Decay,
    pub shift: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum EnvelopeRepr {
    Geometric {
        c: f64,
        rho: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        shift: usize,
    },
    Exponential {
        c: f64,
        rate: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        shift: usize,
    },
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl TryFrom<EnvelopeRepr> for Envelope {
    type Error = Error;
    fn try_from(r: EnvelopeRepr) -> Result<Self> {
        let env = match r {
            EnvelopeRepr::Geometric { c, rho, shift } => Envelope {
                c,
                decay: Decay::Geometric { rho },
                shift,
            },
            EnvelopeRepr::Exponential { c, rate, shift } => Envelope {
                c,
                decay: Decay::Exponential { rate },
                shift,
            },
        };
        env.validate()?;
        Ok(env)
    }
}

impl From<Envelope> for EnvelopeRepr {
    fn from(e: Envelope) -> Self {
        match e.decay {
            Decay::Geometric { rho } => EnvelopeRepr::Geometric {
                c: e.c,
                rho,
                shift: e.shift,
            },
            Decay::Exponential { rate } => EnvelopeRepr::Exponential {
                c: e.c,
                rate,
                shift: e.shift,
            },
        }
    }
}

impl Envelope {
    pub fn geometric(c: f64, rho: f64) -> Result<Self> {
        let e = Envelope {
            c,
            decay: Decay::Geometric { rho },
            shift: 0,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn exponential(c: f64, rate: f64) -> Result<Self> {
        let e = Envelope {
            c,
            decay: Decay::Exponential { rate },
            shift: 0,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn with_shift(mut self, shift: usize) -> Self {
        self.shift = shift;
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = self.c.is_finite()
            && self.c >= 0.0
            && match self.decay {
                Decay::Geometric { rho } => rho.is_finite() && rho >= 0.0,
                Decay::Exponential { rate } => rate.is_finite(),
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid envelope {self:?}")))
        }
    }

    /// ln of the bound at index i (requires i ≥ shift).
    pub fn ln_bound(&self, alpha: &ExponentSequence, i: usize) -> f64 {
        debug_assert!(i >= self.shift);
        let j = i - self.shift;
        self.c.ln()
            + match self.decay {
                Decay::Geometric { rho } => ln_pow(rho.ln(), j as f64),
                Decay::Exponential { rate } => rate * alpha.alpha(j + 1),
            }
    }

    pub fn scaled(&self, factor: f64) -> Envelope {
        Envelope {
            c: self.c * factor.abs(),
            ..*self
        }
    }

    /// An envelope dominating the sum of two sequences covered by `self` and
    /// `other` at every index ≥ max of the shifts.
    pub fn dominate_sum(&self, other: &Envelope) -> Option<Envelope> {
        match (self.decay, other.decay) {
            (Decay::Geometric { rho: ra }, Decay::Geometric { rho: rb }) => {
                let rho = ra.max(rb);
                let shift = self.shift.max(other.shift);
                let ca = self.c * ra.powi((shift - self.shift) as i32);
                let cb = other.c * rb.powi((shift - other.shift) as i32);
                let c = ca + cb;
                c.is_finite().then_some(Envelope {
                    c,
                    decay: Decay::Geometric { rho },
                    shift,
                })
            }
            (Decay::Exponential { rate: a }, Decay::Exponential { rate: b })
                if a == b && self.shift == other.shift =>
            {
                Some(Envelope {
                    c: self.c + other.c,
                    ..*self
                })
            }
            _ => None,
        }
    }

    /// ln of an upper bound for Σ_{i ≥ start} c·g(i − shift)·e^{s·α_{i+1}}.
    /// `None` when the certificate cannot settle the sum.
    pub fn ln_weighted_tail(&self, alpha: &ExponentSequence, s: f64, start: usize) -> Option<f64> {
        if start < self.shift {
            return None;
        }
        if self.c == 0.0 {
            return Some(f64::NEG_INFINITY);
        }
        let ln_c = self.c.ln();
        let j0 = start - self.shift;
        match self.decay {
            Decay::Geometric { rho } => {
                if rho == 0.0 {
                    return Some(if j0 == 0 {
                        ln_c + s * alpha.alpha(start + 1)
                    } else {
                        f64::NEG_INFINITY
                    });
                }
                let ln_rho = rho.ln();
                if alpha.is_linear() {
                    // Σ_j c ρ^j e^{s(j+shift+1)}
                    let x = ln_rho + s;
                    if x >= 0.0 {
                        return None;
                    }
                    return Some(
                        ln_c + s * (self.shift as f64 + 1.0) + j0 as f64 * x - ln_one_minus_exp(x),
                    );
                }
                if s <= 0.0 {
                    if ln_rho >= 0.0 {
                        return None;
                    }
                    // α nondecreasing, so every weight is at most e^{s·α_{start+1}}.
                    return Some(
                        ln_c + j0 as f64 * ln_rho + s * alpha.alpha(start + 1)
                            - ln_one_minus_exp(ln_rho),
                    );
                }
                if ln_rho >= 0.0 {
                    return None;
                }
                let eps = (1.0f64).min(-ln_rho / (2.0 * s));
                let cmaj = alpha.affine_majorant(eps)?;
                let x = ln_rho + s * eps;
                Some(
                    ln_c + s * cmaj + s * eps * (self.shift as f64 + 1.0) + j0 as f64 * x
                        - ln_one_minus_exp(x),
                )
            }
            Decay::Exponential { rate } => {
                let total = rate + s;
                if total >= 0.0 {
                    return None;
                }
                let base = alpha.ln_exp_tail(-total, j0)?;
                if self.shift == 0 || s <= 0.0 {
                    Some(ln_c + base)
                } else {
                    let lip = alpha.lipschitz()?;
                    Some(ln_c + base + s * lip * self.shift as f64)
                }
            }
        }
    }
}

/// How the part of a sequence beyond its stored values is controlled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailCert {
    FinitelySupported,
    Envelope(Envelope),
    /// Nothing is known about the omitted entries.
    Uncertified,
}

impl TailCert {
    pub fn envelope(&self) -> Option<&Envelope> {
        match self {
            TailCert::Envelope(e) => Some(e),
            _ => None,
        }
    }

    /// ln upper bound of the weighted tail from index `start`.
    pub fn ln_weighted_tail(&self, alpha: &ExponentSequence, s: f64, start: usize) -> Result<f64> {
        match self {
            TailCert::FinitelySupported => Ok(f64::NEG_INFINITY),
            TailCert::Envelope(e) => e
                .ln_weighted_tail(alpha, s, start)
                .ok_or(Error::TailUnbounded),
            TailCert::Uncertified => Err(Error::TailUnbounded),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_geometric_tail_closed_form() {
        let a = ExponentSequence::linear();
        let e = Envelope::geometric(1.0, 0.5).unwrap();
        // Σ_{i≥0} 2^{-i} e^{-(i+1)} = e^{-1}/(1 - e^{-1}/2)
        let got = e.ln_weighted_tail(&a, -1.0, 0).unwrap().exp();
        let want = (-1f64).exp() / (1.0 - (-1f64).exp() / 2.0);
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn tail_dominates_brute_force_root() {
        let a = ExponentSequence::root(2).unwrap();
        let e = Envelope::geometric(2.0, 0.8).unwrap().with_shift(3);
        for &s in &[-1.0, -0.25, 0.5, 2.0] {
            let bound = e.ln_weighted_tail(&a, s, 10).unwrap().exp();
            let brute: f64 = (10..20000)
                .map(|i| 2.0 * 0.8f64.powi(i as i32 - 3) * (s * a.alpha(i + 1)).exp())
                .sum();
            assert!(bound >= brute, "s={s}: {bound} < {brute}");
        }
    }

    #[test]
    fn exponential_tail_dominates() {
        let a = ExponentSequence::log();
        let e = Envelope::exponential(1.5, -3.0).unwrap().with_shift(2);
        for &s in &[-1.0, 0.5] {
            let bound = e.ln_weighted_tail(&a, s, 5).unwrap().exp();
            let brute: f64 = (5..200000)
                .map(|i| 1.5 * (-3.0 * a.alpha(i - 2 + 1)).exp() * (s * a.alpha(i + 1)).exp())
                .sum();
            assert!(bound >= brute, "s={s}: {bound} < {brute}");
        }
    }

    #[test]
    fn bounded_envelope_is_unbounded_on_infinite_type() {
        let a = ExponentSequence::linear();
        let e = Envelope::geometric(1.0, 1.0).unwrap();
        assert!(e.ln_weighted_tail(&a, 1.0, 0).is_none());
        assert!(e.ln_weighted_tail(&a, -1.0, 0).is_some());
    }

    #[test]
    fn dominate_sum_covers_both() {
        let a = Envelope::geometric(1.0, 0.5).unwrap().with_shift(2);
        let b = Envelope::geometric(3.0, 0.7).unwrap().with_shift(4);
        let s = a.dominate_sum(&b).unwrap();
        let alpha = ExponentSequence::linear();
        for i in 4..60 {
            let lhs = a.ln_bound(&alpha, i).exp() + b.ln_bound(&alpha, i).exp();
            assert!(lhs <= s.ln_bound(&alpha, i).exp() * (1.0 + 1e-12));
        }
    }
}
