//! One-sided coefficient sequences and their convolution algebra.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::num::{
    convolve_full, convolve_slices, ext_f64, ln_one_minus_exp, log_sum_exp, neumaier_sum,
    rat_to_f64, Coeffs, Rational, Scalar,
};
use crate::spaces::{AlphaKind, ExponentSequence, NormBound, SpaceSpec, SpaceType};
use crate::tail::{Decay, Envelope, TailCert};

/// Default truncation for symbol algebra.
pub const DEFAULT_TRUNCATION: usize = 256;

/// What a sampled symbol holds beyond its data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleExtension {
    /// Reading beyond the data is an error.
    #[default]
    None,
    /// Reading beyond the data yields zero, flagged as extrapolated; the
    /// envelope still bounds the true values.
    Zero,
}

/// A coefficient sequence s_0, s_1, … with a decay certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolRepr", into = "SymbolRepr")]
pub enum Symbol {
    Finite(Coeffs),
    /// s_i = c·r^i
    Geometric {
        c: Scalar,
        r: Scalar,
    },
    /// Stored values plus an optional global envelope. Also the result of
    /// algebra on infinite symbols.
    Sampled {
        values: Coeffs,
        envelope: Option<Envelope>,
        extension: SampleExtension,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum SymbolRepr {
    Finite(Coeffs),
    Geometric {
        c: Scalar,
        r: Scalar,
    },
    Sampled {
        values: Coeffs,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        envelope: Option<Envelope>,
        #[serde(default)]
        extension: SampleExtension,
    },
}

impl TryFrom<SymbolRepr> for Symbol {
    type Error = Error;
    fn try_from(r: SymbolRepr) -> Result<Self> {
        match r {
            SymbolRepr::Finite(c) => Ok(Symbol::Finite(c)),
            SymbolRepr::Geometric { c, r } => {
                if !c.to_f64().is_finite() || !r.to_f64().is_finite() {
                    return Err(Error::InvalidArgument(
                        "geometric symbol needs finite c and r".into(),
                    ));
                }
                Ok(Symbol::geometric(c, r))
            }
            SymbolRepr::Sampled {
                values,
                envelope,
                extension,
            } => Symbol::sampled(values, envelope, extension),
        }
    }
}

impl From<Symbol> for SymbolRepr {
    fn from(s: Symbol) -> Self {
        match s {
            Symbol::Finite(c) => SymbolRepr::Finite(c),
            Symbol::Geometric { c, r } => SymbolRepr::Geometric { c, r },
            Symbol::Sampled {
                values,
                envelope,
                extension,
            } => SymbolRepr::Sampled {
                values,
                envelope,
                extension,
            },
        }
    }
}

/// A coefficient read, flagged when it comes from an extension rule.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffRead {
    pub value: Scalar,
    pub extrapolated: bool,
}

/// ℓ¹ norm with tail bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ell1 {
    #[serde(with = "ext_f64")]
    pub partial: f64,
    #[serde(with = "ext_f64")]
    pub tail: f64,
    pub divergent: bool,
    /// Exact value when a rational closed form exists.
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_rat", default)]
    pub exact: Option<Rational>,
}

mod opt_rat {
    use super::Rational;
    use crate::num::{format_rational, parse_rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(q) => s.serialize_str(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl Ell1 {
    pub fn upper(&self) -> f64 {
        if self.divergent {
            f64::INFINITY
        } else {
            self.partial + self.tail
        }
    }
}

/// Per-grade result of a membership test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradeCheck {
    pub grade: u32,
    pub norm: Option<NormBound>,
    pub divergent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub grades: Vec<GradeCheck>,
    /// Every grade on the grid has a finite certified norm.
    pub all_finite: bool,
    /// Membership decided analytically for all grades, when possible.
    pub decided: Option<bool>,
}

/// Seminorm of a symbol through the embedding x_n = s_{n−1}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymbolNorm {
    Bounded(NormBound),
    Divergent,
}

impl SymbolNorm {
    pub fn ln_upper(&self) -> f64 {
        match self {
            SymbolNorm::Bounded(b) => b.ln_upper(),
            SymbolNorm::Divergent => f64::INFINITY,
        }
    }
    pub fn upper(&self) -> f64 {
        self.ln_upper().exp()
    }
}

impl Symbol {
    pub fn finite(c: Coeffs) -> Symbol {
        Symbol::Finite(c)
    }

    pub fn from_ints(v: &[i64]) -> Symbol {
        Symbol::Finite(Coeffs::from_ints(v))
    }

    pub fn from_scalars(v: &[Scalar]) -> Symbol {
        Symbol::Finite(Coeffs::from_scalars(v))
    }

    pub fn zero() -> Symbol {
        Symbol::Finite(Coeffs::Exact(Vec::new()))
    }

    /// c·δ₀
    pub fn delta(c: Scalar) -> Symbol {
        Symbol::Finite(Coeffs::from_scalars(&[c]))
    }

    /// c·r^i, normalised: r = 0 gives [c], c = 0 gives the zero list.
    pub fn geometric(c: Scalar, r: Scalar) -> Symbol {
        if c.is_zero() {
            Symbol::zero()
        } else if r.is_zero() {
            Symbol::Finite(Coeffs::from_scalars(&[c]))
        } else {
            Symbol::Geometric { c, r }
        }
    }

    pub fn sampled(
        values: Coeffs,
        envelope: Option<Envelope>,
        extension: SampleExtension,
    ) -> Result<Symbol> {
        if let Some(e) = &envelope {
            if e.shift != 0 {
                return Err(Error::InvalidArgument(
                    "symbol envelopes are global (shift 0)".into(),
                ));
            }
            if let Decay::Geometric { .. } = e.decay {
                let alpha = ExponentSequence::linear();
                let lv = values.ln_abs_vec();
                for (i, l) in lv.iter().enumerate() {
                    if *l > e.ln_bound(&alpha, i) + 1e-12 {
                        return Err(Error::InvalidArgument(format!(
                            "envelope does not dominate coefficient {i}"
                        )));
                    }
                }
            }
        }
        Ok(Symbol::Sampled {
            values,
            envelope,
            extension,
        })
    }

    pub fn is_exact(&self) -> bool {
        match self {
            Symbol::Finite(c) => c.is_exact(),
            Symbol::Geometric { c, r } => c.is_exact() && r.is_exact(),
            Symbol::Sampled { values, .. } => values.is_exact(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Symbol::Finite(_))
    }

    /// Number of exactly known coefficients; `None` when all are known.
    pub fn readable_len(&self) -> Option<usize> {
        match self {
            Symbol::Sampled { values, .. } => Some(values.len()),
            _ => None,
        }
    }

    /// Index one past the last nonzero coefficient for finite lists.
    pub fn support_len(&self) -> Option<usize> {
        match self {
            Symbol::Finite(c) => Some(c.support_len()),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support_len() == Some(0)
    }

    pub fn coeff(&self, i: usize) -> Result<Scalar> {
        self.coeff_read(i).map(|r| r.value)
    }

    pub fn coeff_read(&self, i: usize) -> Result<CoeffRead> {
        let plain = |value| {
            Ok(CoeffRead {
                value,
                extrapolated: false,
            })
        };
        match self {
            Symbol::Finite(c) => plain(c.get(i)),
            Symbol::Geometric { c, r } => plain(c.mul(&r.powi(i as u32))),
            Symbol::Sampled {
                values, extension, ..
            } => {
                if i < values.len() {
                    plain(values.get(i))
                } else if *extension == SampleExtension::Zero {
                    Ok(CoeffRead {
                        value: Coeffs::zeros(1, values.is_exact()).get(0),
                        extrapolated: true,
                    })
                } else {
                    Err(Error::OutOfSampledRange {
                        index: i,
                        len: values.len(),
                    })
                }
            }
        }
    }

    /// First `n` coefficients (shorter for sampled data without extension).
    pub fn prefix(&self, n: usize) -> Coeffs {
        match self {
            Symbol::Finite(c) => c.resized(n),
            Symbol::Geometric { c, r } => match (c, r) {
                (Scalar::Exact(c), Scalar::Exact(r)) => {
                    let mut out = Vec::with_capacity(n);
                    let mut cur = c.clone();
                    for _ in 0..n {
                        out.push(cur.clone());
                        cur = &cur * r;
                    }
                    Coeffs::Exact(out)
                }
                _ => {
                    let (c, r) = (c.to_f64(), r.to_f64());
                    Coeffs::Float((0..n).map(|i| c * r.powi(i as i32)).collect())
                }
            },
            Symbol::Sampled { values, .. } => values.truncated(n),
        }
    }

    /// Global tail certificate: dominates every coefficient.
    pub fn tail_cert(&self) -> TailCert {
        match self {
            Symbol::Finite(_) => TailCert::FinitelySupported,
            Symbol::Geometric { c, r } => TailCert::Envelope(Envelope {
                c: c.abs_f64() * (1.0 + 4.0 * f64::EPSILON),
                decay: Decay::Geometric {
                    rho: r.abs_f64() * (1.0 + 2.0 * f64::EPSILON),
                },
                shift: 0,
            }),
            Symbol::Sampled { envelope, .. } => {
                envelope.map_or(TailCert::Uncertified, TailCert::Envelope)
            }
        }
    }

    /// Embedding x_n = s_{n−1}, storing `n` entries for infinite symbols.
    pub fn as_element(&self, n: usize) -> Result<Element> {
        match self {
            Symbol::Finite(c) => Ok(Element::finite(c.clone())),
            Symbol::Geometric { .. } => Element::new(self.prefix(n), self.tail_cert()),
            Symbol::Sampled { values, .. } => Element::new(values.clone(), self.tail_cert()),
        }
    }

    pub fn scale(&self, k: &Scalar) -> Symbol {
        match self {
            Symbol::Finite(c) => Symbol::Finite(c.scale(k)),
            Symbol::Geometric { c, r } => Symbol::geometric(c.mul(k), r.clone()),
            Symbol::Sampled {
                values,
                envelope,
                extension,
            } => Symbol::Sampled {
                values: values.scale(k),
                envelope: envelope.map(|e| e.scaled(k.abs_f64())),
                extension: *extension,
            },
        }
    }

    /// The same symbol with floating coefficients.
    pub fn to_float(&self) -> Symbol {
        match self {
            Symbol::Finite(c) => Symbol::Finite(c.to_float()),
            Symbol::Geometric { c, r } => {
                Symbol::geometric(Scalar::Float(c.to_f64()), Scalar::Float(r.to_f64()))
            }
            Symbol::Sampled {
                values,
                envelope,
                extension,
            } => Symbol::Sampled {
                values: values.to_float(),
                envelope: *envelope,
                extension: *extension,
            },
        }
    }

    /// Geometric(c, r) recognised from an exact description, for closed forms.
    fn exact_geometric(&self) -> Option<(Rational, Rational)> {
        match self {
            Symbol::Geometric {
                c: Scalar::Exact(c),
                r: Scalar::Exact(r),
            } => Some((c.clone(), r.clone())),
            _ => None,
        }
    }
}

/// Σ|s_i| with tail bound. Exponential envelopes need a space; use
/// [`ell1_norm_in`] for those.
pub fn ell1_norm(s: &Symbol) -> Result<Ell1> {
    ell1_norm_with(&ExponentSequence::linear(), s, false)
}

/// Σ|s_i| where exponential envelopes refer to the space's α.
pub fn ell1_norm_in(space: &SpaceSpec, s: &Symbol) -> Result<Ell1> {
    ell1_norm_with(&space.alpha, s, true)
}

fn ell1_norm_with(alpha: &ExponentSequence, s: &Symbol, allow_exponential: bool) -> Result<Ell1> {
    match s {
        Symbol::Finite(Coeffs::Exact(v)) => {
            let q: Rational = v
                .iter()
                .map(|x| x.abs())
                .fold(Rational::zero(), |a, b| a + b);
            Ok(Ell1 {
                partial: rat_to_f64(&q),
                tail: 0.0,
                divergent: false,
                exact: Some(q),
            })
        }
        Symbol::Finite(Coeffs::Float(v)) => Ok(Ell1 {
            partial: neumaier_sum(v.iter().map(|x| x.abs())),
            tail: 0.0,
            divergent: false,
            exact: None,
        }),
        Symbol::Geometric { c, r } => {
            let (ca, ra) = (c.abs_f64(), r.abs_f64());
            if ra >= 1.0 {
                return Ok(Ell1 {
                    partial: f64::INFINITY,
                    tail: 0.0,
                    divergent: true,
                    exact: None,
                });
            }
            if let Some((cq, rq)) = s.exact_geometric() {
                let q = cq.abs() / (Rational::one() - rq.abs());
                return Ok(Ell1 {
                    partial: rat_to_f64(&q),
                    tail: 0.0,
                    divergent: false,
                    exact: Some(q),
                });
            }
            let v = ca / (1.0 - ra);
            Ok(Ell1 {
                partial: v,
                tail: 8.0 * f64::EPSILON * v,
                divergent: false,
                exact: None,
            })
        }
        Symbol::Sampled {
            values, envelope, ..
        } => {
            let env = envelope.ok_or(Error::TailUnbounded)?;
            if !allow_exponential && matches!(env.decay, Decay::Exponential { .. }) {
                return Err(Error::TailUnbounded);
            }
            let partial = neumaier_sum(values.to_f64_vec().into_iter().map(f64::abs));
            let ln_tail = env
                .ln_weighted_tail(alpha, 0.0, values.len())
                .ok_or(Error::TailUnbounded)?;
            Ok(Ell1 {
                partial,
                tail: ln_tail.exp(),
                divergent: false,
                exact: None,
            })
        }
    }
}

/// ‖s‖_k through the embedding, with closed forms for geometric symbols.
pub fn symbol_seminorm(space: &SpaceSpec, s: &Symbol, k: u32) -> Result<SymbolNorm> {
    symbol_seminorm_exponent(space, s, space.grade_exponent(k as f64))
}

/// Σ|s_i|·e^{e·α_{i+1}} for an arbitrary real exponent e.
pub fn symbol_seminorm_exponent(space: &SpaceSpec, s: &Symbol, e: f64) -> Result<SymbolNorm> {
    let alpha = &space.alpha;
    if let Symbol::Geometric { c, r } = s {
        let (lc, lr) = (c.ln_abs(), r.ln_abs());
        if alpha.is_linear() {
            let x = lr + e;
            if x >= 0.0 {
                return Ok(SymbolNorm::Divergent);
            }
            return Ok(SymbolNorm::Bounded(NormBound::exact(
                lc + e - ln_one_minus_exp(x),
            )));
        }
        if e >= 0.0 && lr >= 0.0 {
            return Ok(SymbolNorm::Divergent);
        }
        let sublinear = matches!(alpha.kind(), AlphaKind::Root { .. } | AlphaKind::Log);
        if sublinear && lr > 0.0 {
            return Ok(SymbolNorm::Divergent);
        }
        if matches!(alpha.kind(), AlphaKind::Log) && lr == 0.0 && e >= -1.0 {
            return Ok(SymbolNorm::Divergent);
        }
    }
    let x = s.as_element(DEFAULT_TRUNCATION)?;
    crate::spaces::seminorm_exponent(alpha, &x, e).map(SymbolNorm::Bounded)
}

/// Check ‖s‖_k < ∞ for each grade on the grid.
pub fn membership_check(space: &SpaceSpec, s: &Symbol, grid: &[u32]) -> Result<Membership> {
    let mut grades = Vec::with_capacity(grid.len());
    for &k in grid {
        let g = match symbol_seminorm(space, s, k)? {
            SymbolNorm::Bounded(b) => GradeCheck {
                grade: k,
                norm: Some(b),
                divergent: false,
            },
            SymbolNorm::Divergent => GradeCheck {
                grade: k,
                norm: None,
                divergent: true,
            },
        };
        grades.push(g);
    }
    let all_finite = grades.iter().all(|g| g.norm.is_some());
    let decided = match s {
        Symbol::Finite(_) => Some(true),
        Symbol::Geometric { r, .. } if space.alpha.is_linear() => Some(match space.space_type {
            SpaceType::Finite => r.abs_f64() <= 1.0,
            SpaceType::Infinite => false,
        }),
        _ => None,
    };
    Ok(Membership {
        grades,
        all_finite,
        decided,
    })
}

fn inflate(rho: f64) -> f64 {
    if rho < 1.0 {
        0.5 * (1.0 + rho)
    } else {
        1.5 * rho
    }
}

/// ln sup_{m≥0} C(m+k−1, k−1)·u^m for 0 < u < 1.
fn ln_sup_binomial(k: usize, u: f64) -> f64 {
    let lu = u.ln();
    let f = |m: usize| -> f64 {
        (1..k)
            .map(|j| ((m + j) as f64 / j as f64).ln())
            .sum::<f64>()
            + m as f64 * lu
    };
    let peak = ((u * k as f64 - 1.0) / (1.0 - u)).max(0.0);
    let m0 = peak.floor() as usize;
    [0, m0, m0 + 1, m0 + 2]
        .iter()
        .map(|&m| f(m))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Envelope for the k-fold power of a symbol with global envelope `e`,
/// in one step: C^k·sup_m C(m+k−1,k−1)(ρ/ρ')^m with ρ' inflated once.
pub fn power_envelope(e: &Envelope, k: usize) -> Option<Envelope> {
    if k == 1 {
        return Some(*e);
    }
    let Decay::Geometric { rho } = e.decay else {
        return None;
    };
    if rho == 0.0 {
        return Some(Envelope {
            c: e.c.powi(k as i32),
            ..*e
        });
    }
    let rp = inflate(rho);
    let ln_c = k as f64 * e.c.ln() + ln_sup_binomial(k, rho / rp);
    let c = ln_c.exp() * (1.0 + 1e-12);
    c.is_finite().then_some(Envelope {
        c,
        decay: Decay::Geometric { rho: rp },
        shift: 0,
    })
}

/// Envelope of a*b from the factors' certificates.
pub fn product_envelope(alpha: &ExponentSequence, a: &Symbol, b: &Symbol) -> Option<Envelope> {
    match (a.tail_cert(), b.tail_cert()) {
        (TailCert::FinitelySupported, TailCert::Envelope(e)) => {
            finite_times_envelope(alpha, &a.prefix(a.support_len()?), &e)
        }
        (TailCert::Envelope(e), TailCert::FinitelySupported) => {
            finite_times_envelope(alpha, &b.prefix(b.support_len()?), &e)
        }
        (TailCert::Envelope(e1), TailCert::Envelope(e2)) => {
            let (Decay::Geometric { rho: r1 }, Decay::Geometric { rho: r2 }) = (e1.decay, e2.decay)
            else {
                return None;
            };
            if r1 == 0.0 || r2 == 0.0 {
                let rho = r1.max(r2);
                return Some(Envelope {
                    c: e1.c * e2.c,
                    decay: Decay::Geometric { rho },
                    shift: 0,
                });
            }
            let rmax = r1.max(r2);
            let rp = inflate(rmax);
            let c = (e1.c.ln() + e2.c.ln() + ln_sup_binomial(2, rmax / rp)).exp() * (1.0 + 1e-12);
            c.is_finite().then_some(Envelope {
                c,
                decay: Decay::Geometric { rho: rp },
                shift: 0,
            })
        }
        _ => None,
    }
}

fn finite_times_envelope(alpha: &ExponentSequence, a: &Coeffs, e: &Envelope) -> Option<Envelope> {
    let la = a.ln_abs_vec();
    let weights: Vec<f64> = match e.decay {
        Decay::Geometric { rho } => {
            if rho == 0.0 {
                return None;
            }
            la.iter()
                .enumerate()
                .map(|(i, l)| l - i as f64 * rho.ln())
                .collect()
        }
        Decay::Exponential { rate } => {
            if rate > 0.0 {
                la.clone()
            } else {
                let lip = alpha.lipschitz()?;
                la.iter()
                    .enumerate()
                    .map(|(i, l)| l - rate * lip * i as f64)
                    .collect()
            }
        }
    };
    let c = (e.c.ln() + log_sum_exp(&weights)).exp() * (1.0 + 1e-12);
    c.is_finite().then_some(Envelope { c, ..*e })
}

/// Values of a*b on [0, n) from prefixes, exact when both are exact.
fn convolve_values(a: &Coeffs, b: &Coeffs, n: usize) -> Coeffs {
    match (a, b) {
        (Coeffs::Exact(x), Coeffs::Exact(y)) => Coeffs::Exact(convolve_slices(x, y, n)),
        _ => Coeffs::Float(convolve_slices(&a.to_f64_vec(), &b.to_f64_vec(), n)),
    }
}

fn convolve_full_values(a: &Coeffs, b: &Coeffs) -> Coeffs {
    match (a, b) {
        (Coeffs::Exact(x), Coeffs::Exact(y)) => Coeffs::Exact(convolve_full(x, y)),
        _ => Coeffs::Float(convolve_full(&a.to_f64_vec(), &b.to_f64_vec())),
    }
}

fn common_len(a: &Symbol, b: &Symbol, n: usize) -> usize {
    let mut l = n;
    if let Some(r) = a.readable_len() {
        l = l.min(r);
    }
    if let Some(r) = b.readable_len() {
        l = l.min(r);
    }
    l
}

/// a*b. Finite inputs give the full (exact) product; otherwise the first
/// `n` coefficients that both inputs determine, with a product envelope.
pub fn convolve(a: &Symbol, b: &Symbol, n: usize) -> Symbol {
    convolve_in(&ExponentSequence::linear(), a, b, n)
}

/// As [`convolve`], with exponential envelopes read against `alpha`.
pub fn convolve_in(alpha: &ExponentSequence, a: &Symbol, b: &Symbol, n: usize) -> Symbol {
    if a.is_zero() || b.is_zero() {
        return Symbol::zero();
    }
    if let (Symbol::Finite(x), Symbol::Finite(y)) = (a, b) {
        return Symbol::Finite(convolve_full_values(&x.trimmed(), &y.trimmed()));
    }
    let l = common_len(a, b, n);
    let values = convolve_values(&a.prefix(l), &b.prefix(l), l);
    Symbol::Sampled {
        values,
        envelope: product_envelope(alpha, a, b),
        extension: SampleExtension::None,
    }
}

/// a^{*k} by binary splitting; equals [`conv_power_iterated`] exactly in
/// exact arithmetic. Infinite symbols carry the one-step k-fold envelope.
pub fn conv_power(a: &Symbol, k: usize, n: usize) -> Result<Symbol> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "convolution power needs k ≥ 1".into(),
        ));
    }
    if let Symbol::Finite(x) = a {
        let base = x.trimmed();
        if base.is_empty() {
            return Ok(Symbol::zero());
        }
        let mut result: Option<Coeffs> = None;
        let mut sq = base;
        let mut e = k;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => sq.clone(),
                    Some(r) => convolve_full_values(&r, &sq),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            sq = convolve_full_values(&sq, &sq);
        }
        return Ok(Symbol::Finite(result.unwrap()));
    }
    let l = common_len(a, a, n);
    let base = a.prefix(l);
    let mut result: Option<Coeffs> = None;
    let mut sq = base;
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some(r) => convolve_values(&r, &sq, l),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        sq = convolve_values(&sq, &sq, l);
    }
    let envelope = a
        .tail_cert()
        .envelope()
        .and_then(|env| power_envelope(env, k));
    Ok(Symbol::Sampled {
        values: result.unwrap(),
        envelope,
        extension: SampleExtension::None,
    })
}

/// a^{*k} by k−1 successive convolutions.
pub fn conv_power_iterated(a: &Symbol, k: usize, n: usize) -> Result<Symbol> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "convolution power needs k ≥ 1".into(),
        ));
    }
    let table = ConvPowerTable::build(a, k, n)?;
    Ok(table.power(k).clone())
}

/// θ^{*k} for k = 1..=K, truncated to length N for infinite symbols.
#[derive(Clone, Debug)]
pub struct ConvPowerTable {
    base: Symbol,
    n: usize,
    powers: Vec<Symbol>,
}

impl ConvPowerTable {
    pub fn build(base: &Symbol, k_max: usize, n: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::InvalidArgument("power table needs K ≥ 1".into()));
        }
        let env = base.tail_cert().envelope().copied();
        let mut powers = Vec::with_capacity(k_max);
        match base {
            Symbol::Finite(x) => {
                let b = x.trimmed();
                let mut cur = b.clone();
                powers.push(Symbol::Finite(cur.clone()));
                for _ in 2..=k_max {
                    cur = if b.is_empty() {
                        b.clone()
                    } else {
                        convolve_full_values(&cur, &b)
                    };
                    powers.push(Symbol::Finite(cur.clone()));
                }
            }
            _ => {
                let l = common_len(base, base, n);
                let b = base.prefix(l);
                let mut cur = b.clone();
                powers.push(Symbol::Sampled {
                    values: cur.clone(),
                    envelope: env,
                    extension: SampleExtension::None,
                });
                for k in 2..=k_max {
                    cur = convolve_values(&cur, &b, l);
                    let envelope = env.and_then(|e| power_envelope(&e, k));
                    powers.push(Symbol::Sampled {
                        values: cur.clone(),
                        envelope,
                        extension: SampleExtension::None,
                    });
                }
            }
        }
        Ok(ConvPowerTable {
            base: base.clone(),
            n,
            powers,
        })
    }

    pub fn base(&self) -> &Symbol {
        &self.base
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.powers.len()
    }

    /// θ^{*k}, 1 ≤ k ≤ K.
    pub fn power(&self, k: usize) -> &Symbol {
        &self.powers[k - 1]
    }

    pub fn is_exact(&self) -> bool {
        self.base.is_exact()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn coeff_examples() {
        let g = Symbol::geometric(Scalar::int(1), Scalar::ratio(1, 2));
        assert_eq!(g.coeff(3).unwrap(), Scalar::ratio(1, 8));
        assert_eq!(Symbol::from_ints(&[1, 1]).coeff(5).unwrap(), Scalar::int(0));
        let s = Symbol::sampled(
            Coeffs::from_ints(&[1, 2, 3, 4]),
            None,
            SampleExtension::None,
        )
        .unwrap();
        assert_eq!(
            s.coeff(9),
            Err(Error::OutOfSampledRange { index: 9, len: 4 })
        );
        let z = Symbol::sampled(
            Coeffs::from_ints(&[1, 2, 3, 4]),
            None,
            SampleExtension::Zero,
        )
        .unwrap();
        let r = z.coeff_read(9).unwrap();
        assert!(r.extrapolated && r.value.is_zero());
    }

    #[test]
    fn convolve_examples() {
        let a = Symbol::from_ints(&[1, 1]);
        assert_eq!(convolve(&a, &a, 16), Symbol::from_ints(&[1, 2, 1]));
        let d = Symbol::from_ints(&[1]);
        let b = Symbol::from_ints(&[3, 0, -2, 5]);
        assert_eq!(convolve(&d, &b, 16), b);
        let g2 = Symbol::geometric(Scalar::int(1), Scalar::ratio(1, 2));
        let g3 = Symbol::geometric(Scalar::int(1), Scalar::ratio(1, 3));
        let p = convolve(&g2, &g3, 8);
        // Brute-force oracle: 1/4 + 1/6 + 1/9.
        assert_eq!(
            p.coeff(2).unwrap(),
            Scalar::Exact(q(1, 4) + q(1, 6) + q(1, 9))
        );
    }

    #[test]
    fn conv_power_examples() {
        let a = Symbol::from_ints(&[1, 1]);
        assert_eq!(
            conv_power(&a, 3, 16).unwrap(),
            Symbol::from_ints(&[1, 3, 3, 1])
        );
        let c = Symbol::delta(Scalar::ratio(2, 3));
        assert_eq!(
            conv_power(&c, 5, 16).unwrap(),
            Symbol::delta(Scalar::ratio(32, 243))
        );
        let g = Symbol::geometric(Scalar::int(1), Scalar::ratio(1, 2));
        let p = conv_power(&g, 2, 8).unwrap();
        let brute: Rational = (0..=3).map(|i| q(1, 1 << i) * q(1, 1 << (3 - i))).sum();
        assert_eq!(p.coeff(3).unwrap(), Scalar::Exact(brute.clone()));
        assert_eq!(brute, q(1, 2));
    }

    #[test]
    fn binary_splitting_matches_iteration_on_geometric() {
        let g = Symbol::geometric(Scalar::ratio(2, 3), Scalar::ratio(-1, 2));
        for k in 1..=9 {
            let a = conv_power(&g, k, 20).unwrap();
            let b = conv_power_iterated(&g, k, 20).unwrap();
            assert_eq!(a.prefix(20), b.prefix(20), "k = {k}");
        }
    }

    #[test]
    fn ell1_examples() {
        let g = Symbol::geometric(Scalar::ratio(1, 2), Scalar::ratio(1, 2));
        let e = ell1_norm(&g).unwrap();
        assert_eq!(e.exact, Some(Rational::one()));
        assert_eq!(
            ell1_norm(&Symbol::from_ints(&[1, 1])).unwrap().exact,
            Some(q(2, 1))
        );
        let bounded = Symbol::sampled(
            Coeffs::from_ints(&[1, 1, 1]),
            Some(Envelope::geometric(1.0, 1.0).unwrap()),
            SampleExtension::None,
        )
        .unwrap();
        assert_eq!(ell1_norm(&bounded), Err(Error::TailUnbounded));
        let div = Symbol::geometric(Scalar::int(1), Scalar::int(1));
        assert!(ell1_norm(&div).unwrap().divergent);
    }

    #[test]
    fn membership_examples() {
        let l1 = SpaceSpec::lambda1_linear();
        let grid: Vec<u32> = (1..=8).collect();
        // ln 2 < 1 makes grade 1 converge; grades ≥ 2 diverge.
        let g = Symbol::geometric(Scalar::int(1), Scalar::int(2));
        let m = membership_check(&l1, &g, &grid).unwrap();
        assert!(m.grades[0].norm.is_some());
        assert!(m.grades[1..].iter().all(|g| g.divergent));
        assert_eq!(m.decided, Some(false));
        let ones = Symbol::geometric(Scalar::int(1), Scalar::int(1));
        let m = membership_check(&l1, &ones, &grid).unwrap();
        assert!(m.all_finite);
        let li = SpaceSpec::lambda_inf_linear();
        let m = membership_check(&li, &Symbol::from_ints(&[1, -3, 2]), &grid).unwrap();
        assert!(m.all_finite && m.decided == Some(true));
    }

    #[test]
    fn geometric_norm_matches_brute_force_on_root() {
        let sp = SpaceSpec::new(SpaceType::Infinite, ExponentSequence::root(2).unwrap());
        let g = Symbol::geometric(Scalar::Float(1.5), Scalar::Float(0.3));
        for k in 1..=4 {
            let b = symbol_seminorm(&sp, &g, k).unwrap();
            let brute: f64 = (0..3000)
                .map(|i| 1.5 * 0.3f64.powi(i) * (k as f64 * ((i + 1) as f64).sqrt()).exp())
                .sum();
            assert!(b.upper() >= brute * (1.0 - 1e-12));
            assert!(
                b.upper() <= brute * 1.01,
                "k={k}: loose bound {} vs {}",
                b.upper(),
                brute
            );
        }
    }

    #[test]
    fn power_envelope_dominates_coefficients() {
        for &(c, r) in &[(1.0, 0.5), (2.0, -0.9), (0.5, 0.99)] {
            let g = Symbol::geometric(Scalar::Float(c), Scalar::Float(r));
            let t = ConvPowerTable::build(&g, 8, 129).unwrap();
            for k in 1..=8 {
                let p = t.power(k);
                let env = p.tail_cert().envelope().copied().unwrap();
                let alpha = ExponentSequence::linear();
                for m in 0..=128 {
                    let v = p.coeff(m).unwrap().abs_f64();
                    assert!(
                        v <= env.ln_bound(&alpha, m).exp() * (1.0 + 1e-12),
                        "c={c} r={r} k={k} m={m}"
                    );
                }
            }
        }
    }
}
