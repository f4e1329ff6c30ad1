//! Scalars, coefficient vectors and log-domain summation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Arithmetic needed by the convolution kernels.
pub trait Ring:
    Clone
    + Send
    + Sync
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn to_f64_lossy(&self) -> f64;
    fn abs_f64(&self) -> f64 {
        self.to_f64_lossy().abs()
    }
}

impl Ring for f64 {
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Ring for Rational {
    fn to_f64_lossy(&self) -> f64 {
        rat_to_f64(self)
    }
}

/// Nearest f64 to a rational, robust to huge numerators and denominators.
pub fn rat_to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() && (v != 0.0 || q.is_zero()) {
            return v;
        }
    }
    // Fall back to logarithms of the parts.
    if q.is_zero() {
        return 0.0;
    }
    let ln = ln_abs_bigint(q.numer()) - ln_abs_bigint(q.denom());
    let mag = ln.exp();
    if q.is_negative() {
        -mag
    } else {
        mag
    }
}

/// ln|q| for a nonzero rational; -inf for zero.
pub fn ln_abs_rat(q: &Rational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_abs_bigint(q.numer()) - ln_abs_bigint(q.denom())
}

fn ln_abs_bigint(b: &BigInt) -> f64 {
    let bits = b.bits();
    if bits < 1000 {
        return b.to_f64().map(|v| v.abs().ln()).unwrap_or(f64::INFINITY);
    }
    let shift = bits - 64;
    let top: BigInt = b.abs() >> shift as usize;
    top.to_f64().unwrap_or(1.0).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact rational from a finite f64 (the binary value, not a decimal guess).
pub fn f64_to_rat(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::InvalidArgument(format!("non-finite value {v}")))
}

/// Parse "p/q", "p" or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse rational {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Ok(Rational::from_integer(p));
    }
    // Decimal such as "-0.125" is read exactly.
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').ok_or_else(bad)?;
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() {
        return Err(bad());
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let d = num_traits::pow(BigInt::from(10), frac.len());
    let q = Rational::new(n, d);
    Ok(if neg { -q } else { q })
}

pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A single coefficient: exact rational or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rational::zero())
    }
    pub fn one() -> Self {
        Scalar::Exact(Rational::one())
    }
    pub fn int(v: i64) -> Self {
        Scalar::Exact(Rational::from_integer(v.into()))
    }
    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Exact(Rational::new(p.into(), q.into()))
    }
    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rat_to_f64(q),
            Scalar::Float(v) => *v,
        }
    }
    pub fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
    pub fn ln_abs(&self) -> f64 {
        match self {
            Scalar::Exact(q) => ln_abs_rat(q),
            Scalar::Float(v) => v.abs().ln(),
        }
    }
    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Float(_) => None,
        }
    }
    /// Exact value, converting floats through their binary representation.
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Scalar::Exact(q) => Ok(q.clone()),
            Scalar::Float(v) => f64_to_rat(*v),
        }
    }
    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Float(v) => Scalar::Float(v.abs()),
        }
    }
    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => Scalar::Float(self.to_f64() * other.to_f64()),
        }
    }
    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => Scalar::Float(self.to_f64() + other.to_f64()),
        }
    }
    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => Scalar::Float(self.to_f64() - other.to_f64()),
        }
    }
    pub fn powi(&self, k: u32) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(num_traits::pow(q.clone(), k as usize)),
            Scalar::Float(v) => Scalar::Float(v.powi(k as i32)),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => f.write_str(&format_rational(q)),
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl From<Rational> for Scalar {
    fn from(q: Rational) -> Self {
        Scalar::Exact(q)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(q) => {
                if q.is_integer() {
                    if let Some(i) = q.numer().to_i64() {
                        return s.serialize_i64(i);
                    }
                }
                s.serialize_str(&format_rational(q))
            }
            Scalar::Float(v) => ext_f64::serialize(v, s),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Scalar;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a rational string \"p/q\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::Exact(Rational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::Float(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Scalar, E> {
                match v {
                    "inf" => Ok(Scalar::Float(f64::INFINITY)),
                    "-inf" => Ok(Scalar::Float(f64::NEG_INFINITY)),
                    "nan" => Ok(Scalar::Float(f64::NAN)),
                    _ => parse_rational(v).map(Scalar::Exact).map_err(E::custom),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Serde helpers writing non-finite floats as the strings "inf", "-inf", "nan".
pub mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("bad float {s:?}"))),
            },
        }
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&super::Wrap(*x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let raw: Vec<super::Wrap> = Vec::deserialize(d)?;
            Ok(raw.into_iter().map(|w| w.0).collect())
        }
    }

    pub mod opt {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.serialize_some(&super::Wrap(*x)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            let raw: Option<super::Wrap> = Option::deserialize(d)?;
            Ok(raw.map(|w| w.0))
        }
    }

    /// Newtype carrying the same encoding, for nested containers.
    #[derive(Clone, Copy, Debug, PartialEq)]
    pub struct Wrap(pub f64);

    impl serde::Serialize for Wrap {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize(&self.0, s)
        }
    }

    impl<'de> Deserialize<'de> for Wrap {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            deserialize(d).map(Wrap)
        }
    }
}

/// A coefficient vector, exact or floating throughout.
#[derive(Clone, Debug, PartialEq)]
pub enum Coeffs {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl Coeffs {
    /// Build from scalars; any float promotes the whole vector.
    pub fn from_scalars(values: &[Scalar]) -> Coeffs {
        if values.iter().all(Scalar::is_exact) {
            Coeffs::Exact(
                values
                    .iter()
                    .map(|s| s.as_exact().unwrap().clone())
                    .collect(),
            )
        } else {
            Coeffs::Float(values.iter().map(Scalar::to_f64).collect())
        }
    }

    pub fn from_ints(values: &[i64]) -> Coeffs {
        Coeffs::Exact(
            values
                .iter()
                .map(|&v| Rational::from_integer(v.into()))
                .collect(),
        )
    }

    pub fn zeros(n: usize, exact: bool) -> Coeffs {
        if exact {
            Coeffs::Exact(vec![Rational::zero(); n])
        } else {
            Coeffs::Float(vec![0.0; n])
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Coeffs::Exact(v) => v.len(),
            Coeffs::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeffs::Exact(_))
    }

    pub fn get(&self, i: usize) -> Scalar {
        match self {
            Coeffs::Exact(v) => Scalar::Exact(v.get(i).cloned().unwrap_or_else(Rational::zero)),
            Coeffs::Float(v) => Scalar::Float(v.get(i).copied().unwrap_or(0.0)),
        }
    }

    pub fn get_f64(&self, i: usize) -> f64 {
        match self {
            Coeffs::Exact(v) => v.get(i).map(rat_to_f64).unwrap_or(0.0),
            Coeffs::Float(v) => v.get(i).copied().unwrap_or(0.0),
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        match self {
            Coeffs::Exact(v) => v.iter().map(rat_to_f64).collect(),
            Coeffs::Float(v) => v.clone(),
        }
    }

    pub fn to_scalars(&self) -> Vec<Scalar> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// ln|v_i| for every entry.
    pub fn ln_abs_vec(&self) -> Vec<f64> {
        match self {
            Coeffs::Exact(v) => v.iter().map(ln_abs_rat).collect(),
            Coeffs::Float(v) => v.iter().map(|x| x.abs().ln()).collect(),
        }
    }

    pub fn to_float(&self) -> Coeffs {
        Coeffs::Float(self.to_f64_vec())
    }

    /// Exact copy; floats convert through their binary value.
    pub fn to_exact(&self) -> Result<Vec<Rational>> {
        match self {
            Coeffs::Exact(v) => Ok(v.clone()),
            Coeffs::Float(v) => v.iter().map(|&x| f64_to_rat(x)).collect(),
        }
    }

    /// Index one past the last nonzero entry.
    pub fn support_len(&self) -> usize {
        match self {
            Coeffs::Exact(v) => v.iter().rposition(|q| !q.is_zero()).map_or(0, |i| i + 1),
            Coeffs::Float(v) => v.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1),
        }
    }

    pub fn truncated(&self, n: usize) -> Coeffs {
        match self {
            Coeffs::Exact(v) => Coeffs::Exact(v[..n.min(v.len())].to_vec()),
            Coeffs::Float(v) => Coeffs::Float(v[..n.min(v.len())].to_vec()),
        }
    }

    /// Copy padded with zeros (or truncated) to length `n`.
    pub fn resized(&self, n: usize) -> Coeffs {
        match self {
            Coeffs::Exact(v) => {
                let mut w = v.clone();
                w.resize(n, Rational::zero());
                Coeffs::Exact(w)
            }
            Coeffs::Float(v) => {
                let mut w = v.clone();
                w.resize(n, 0.0);
                Coeffs::Float(w)
            }
        }
    }

    pub fn trimmed(&self) -> Coeffs {
        self.truncated(self.support_len())
    }

    /// Entrywise sum, promoting to float when either side is float.
    pub fn add(&self, other: &Coeffs) -> Coeffs {
        let n = self.len().max(other.len());
        match (self, other) {
            (Coeffs::Exact(_), Coeffs::Exact(_)) => {
                let (a, b) = (self.resized(n), other.resized(n));
                let (Coeffs::Exact(a), Coeffs::Exact(b)) = (a, b) else {
                    unreachable!()
                };
                Coeffs::Exact(a.into_iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => {
                let (a, b) = (self.to_float().resized(n), other.to_float().resized(n));
                Coeffs::Float(
                    a.to_f64_vec()
                        .iter()
                        .zip(b.to_f64_vec())
                        .map(|(x, y)| x + y)
                        .collect(),
                )
            }
        }
    }

    pub fn scale(&self, c: &Scalar) -> Coeffs {
        match (self, c) {
            (Coeffs::Exact(v), Scalar::Exact(q)) => {
                Coeffs::Exact(v.iter().map(|x| x * q).collect())
            }
            _ => {
                let f = c.to_f64();
                Coeffs::Float(self.to_f64_vec().into_iter().map(|x| x * f).collect())
            }
        }
    }

    /// Equality ignoring trailing zeros; floats compare by value.
    pub fn same_values(&self, other: &Coeffs) -> bool {
        let n = self.len().max(other.len());
        match (self, other) {
            (Coeffs::Exact(_), Coeffs::Exact(_)) => self.resized(n) == other.resized(n),
            _ => (0..n).all(|i| self.get_f64(i) == other.get_f64(i)),
        }
    }
}

impl Serialize for Coeffs {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_scalars().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coeffs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<Scalar> = Vec::deserialize(d)?;
        Ok(Coeffs::from_scalars(&v))
    }
}

/// Truncated Cauchy product of two slices: entries 0..n.
pub fn convolve_slices<T: Ring>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    for (i, ai) in a.iter().enumerate().take(n) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n - i) {
            if bj.is_zero() {
                continue;
            }
            out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
        }
    }
    out
}

/// Full Cauchy product of two finite slices.
pub fn convolve_full<T: Ring>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    convolve_slices(a, b, a.len() + b.len() - 1)
}

/// Neumaier-compensated sum.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// ln Σ exp(t_i) by shifting with the maximum, compensated.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + neumaier_sum(terms.iter().map(|&t| (t - m).exp())).ln()
}

/// ln(e^a + e^b).
pub fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ln(1 - e^x) for x < 0.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// j·ln r with the convention 0·ln 0 = 0.
pub fn ln_pow(ln_r: f64, j: f64) -> f64 {
    if j == 0.0 {
        0.0
    } else {
        j * ln_r
    }
}

/// Relative slack of `lhs ≤ rhs` from logarithms: 1 − lhs/rhs.
/// Zero right-hand sides give slack 0 when lhs is also zero, −inf otherwise.
pub fn rel_slack_ln(ln_lhs: f64, ln_rhs: f64) -> f64 {
    if ln_lhs == f64::NEG_INFINITY {
        return if ln_rhs == f64::NEG_INFINITY {
            0.0
        } else {
            1.0
        };
    }
    if ln_rhs == f64::NEG_INFINITY || ln_lhs == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if ln_rhs == f64::INFINITY {
        return 1.0;
    }
    -(ln_lhs - ln_rhs).exp_m1()
}
