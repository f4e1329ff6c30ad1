//! Truncated sequence-space elements with a tail certificate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{Coeffs, Rational, Scalar};
use crate::tail::TailCert;

/// x = (x_1, x_2, …) stored 0-based: `values[i]` is x_{i+1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Element {
    values: Coeffs,
    tail: TailCert,
}

impl Element {
    pub fn new(values: Coeffs, tail: TailCert) -> Result<Self> {
        if let TailCert::Envelope(e) = &tail {
            if e.shift > values.len() {
                return Err(Error::InvalidArgument(format!(
                    "envelope shift {} exceeds stored length {}",
                    e.shift,
                    values.len()
                )));
            }
        }
        Ok(Element { values, tail })
    }

    pub fn finite(values: Coeffs) -> Self {
        Element {
            values,
            tail: TailCert::FinitelySupported,
        }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Element::finite(Coeffs::from_ints(values))
    }

    pub fn zero() -> Self {
        Element::finite(Coeffs::Exact(Vec::new()))
    }

    /// e_n, n ≥ 1.
    pub fn basis(n: usize) -> Self {
        assert!(n >= 1, "basis vectors are indexed from 1");
        let mut v = vec![Rational::from_integer(0.into()); n];
        v[n - 1] = Rational::from_integer(1.into());
        Element::finite(Coeffs::Exact(v))
    }

    pub fn values(&self) -> &Coeffs {
        &self.values
    }

    pub fn tail(&self) -> &TailCert {
        &self.tail
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finitely_supported(&self) -> bool {
        self.tail == TailCert::FinitelySupported
    }

    pub fn is_exact(&self) -> bool {
        self.values.is_exact()
    }

    /// x_n for n ≥ 1 (zero beyond storage for finitely supported elements).
    pub fn get(&self, n: usize) -> Scalar {
        self.values.get(n - 1)
    }

    pub fn scale(&self, c: &Scalar) -> Element {
        let tail = match self.tail {
            TailCert::Envelope(e) => TailCert::Envelope(e.scaled(c.abs_f64())),
            t => t,
        };
        Element {
            values: self.values.scale(c),
            tail,
        }
    }

    /// Zero-pad a finitely supported element to at least `n` stored entries.
    pub fn padded(&self, n: usize) -> Element {
        if !self.is_finitely_supported() || n <= self.len() {
            return self.clone();
        }
        Element {
            values: self.values.resized(n),
            tail: self.tail,
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        let (a, b) = (self, other);
        let tail = match (a.tail, b.tail) {
            (TailCert::FinitelySupported, TailCert::FinitelySupported) => {
                TailCert::FinitelySupported
            }
            (TailCert::Envelope(e), TailCert::FinitelySupported)
                if b.values.support_len() <= a.len() =>
            {
                TailCert::Envelope(e)
            }
            (TailCert::FinitelySupported, TailCert::Envelope(e))
                if a.values.support_len() <= b.len() =>
            {
                TailCert::Envelope(e)
            }
            (TailCert::Envelope(ea), TailCert::Envelope(eb)) if a.len() == b.len() => {
                TailCert::Envelope(ea.dominate_sum(&eb).ok_or(Error::TailUnbounded)?)
            }
            _ => return Err(Error::TailUnbounded),
        };
        let n = match tail {
            TailCert::FinitelySupported => a.len().max(b.len()),
            _ => a.len().max(b.len()).min(if a.is_finitely_supported() {
                b.len()
            } else {
                a.len()
            }),
        };
        let values = a.values.truncated(n).add(&b.values.truncated(n));
        Element::new(values, tail)
    }

    /// Same stored values up to trailing zeros and the same tail certificate.
    pub fn same_values(&self, other: &Element) -> bool {
        self.values.same_values(&other.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tail::Envelope;

    #[test]
    fn basis_and_get() {
        let e = Element::basis(3);
        assert_eq!(e.get(3), Scalar::int(1));
        assert_eq!(e.get(1), Scalar::int(0));
        assert_eq!(e.get(9), Scalar::int(0));
    }

    #[test]
    fn add_finite_and_enveloped() {
        let env = Envelope::geometric(1.0, 0.5).unwrap().with_shift(3);
        let a = Element::new(Coeffs::from_ints(&[1, 2, 3]), TailCert::Envelope(env)).unwrap();
        let b = Element::from_ints(&[1, 1]);
        let s = a.add(&b).unwrap();
        assert_eq!(s.values(), &Coeffs::from_ints(&[2, 3, 3]));
        assert!(matches!(s.tail(), TailCert::Envelope(_)));
        let long = Element::from_ints(&[1, 1, 1, 1, 1]);
        assert_eq!(a.add(&long), Err(Error::TailUnbounded));
    }

    #[test]
    fn shift_beyond_length_rejected() {
        let env = Envelope::geometric(1.0, 0.5).unwrap().with_shift(5);
        assert!(Element::new(Coeffs::from_ints(&[1]), TailCert::Envelope(env)).is_err());
    }
}
