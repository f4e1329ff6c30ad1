//! Exponent sequences, power series spaces and their structural certificates.

use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::num::{ext_f64, ln_add, ln_one_minus_exp, log_sum_exp, neumaier_sum, Coeffs};
use crate::symbols::Symbol;
use crate::tail::{Decay, Envelope, TailCert};

/// Rule extending an explicit prefix of α beyond its last value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Extension {
    /// α_{L+j} = α_L + slope·j
    Affine { slope: f64 },
    /// α_{L+j} = α_L·factor^j
    Ratio { factor: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaKind {
    /// α_n = n
    Linear,
    /// α_n = n^{1/d}
    Root { d: u32 },
    /// α_n = ln(n+1)
    Log,
    Explicit {
        values: Vec<f64>,
        extension: Extension,
    },
}

/// A nonnegative, nondecreasing exponent sequence α₁, α₂, … diverging to ∞.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphaKind", into = "AlphaKind")]
pub struct ExponentSequence {
    kind: AlphaKind,
}

impl TryFrom<AlphaKind> for ExponentSequence {
    type Error = Error;
    fn try_from(kind: AlphaKind) -> Result<Self> {
        match &kind {
            AlphaKind::Root { d } if *d == 0 => {
                return Err(Error::InvalidArgument("root degree must be ≥ 1".into()))
            }
            AlphaKind::Explicit { values, extension } => {
                if values.is_empty() {
                    return Err(Error::InvalidArgument(
                        "explicit α needs at least one value".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidArgument(
                        "explicit α values must be finite and ≥ 0".into(),
                    ));
                }
                if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
                    return Err(Error::InvalidArgument(format!(
                        "explicit α decreases at n = {}",
                        i + 2
                    )));
                }
                let last = *values.last().unwrap();
                let diverges = match extension {
                    Extension::Affine { slope } => slope.is_finite() && *slope > 0.0,
                    Extension::Ratio { factor } => {
                        factor.is_finite() && *factor > 1.0 && last > 0.0
                    }
                };
                if !diverges {
                    return Err(Error::InvalidArgument(
                        "explicit α extension must diverge".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(ExponentSequence { kind })
    }
}

impl From<ExponentSequence> for AlphaKind {
    fn from(a: ExponentSequence) -> Self {
        a.kind
    }
}

impl ExponentSequence {
    pub fn linear() -> Self {
        ExponentSequence {
            kind: AlphaKind::Linear,
        }
    }

    pub fn root(d: u32) -> Result<Self> {
        AlphaKind::Root { d }.try_into()
    }

    pub fn log() -> Self {
        ExponentSequence {
            kind: AlphaKind::Log,
        }
    }

    pub fn explicit(values: Vec<f64>, extension: Extension) -> Result<Self> {
        AlphaKind::Explicit { values, extension }.try_into()
    }

    pub fn kind(&self) -> &AlphaKind {
        &self.kind
    }

    /// α_n for n ≥ 1.
    pub fn alpha(&self, n: usize) -> f64 {
        debug_assert!(n >= 1, "α is indexed from 1");
        let x = n as f64;
        match &self.kind {
            AlphaKind::Linear => x,
            AlphaKind::Root { d: 1 } => x,
            AlphaKind::Root { d: 2 } => x.sqrt(),
            AlphaKind::Root { d: 3 } => x.cbrt(),
            AlphaKind::Root { d } => x.powf(1.0 / *d as f64),
            AlphaKind::Log => x.ln_1p(),
            AlphaKind::Explicit { values, extension } => {
                let len = values.len();
                if n <= len {
                    return values[n - 1];
                }
                let last = values[len - 1];
                let j = (n - len) as f64;
                match extension {
                    Extension::Affine { slope } => last + slope * j,
                    Extension::Ratio { factor } => last * factor.powf(j),
                }
            }
        }
    }

    /// α_n = n exactly.
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, AlphaKind::Linear | AlphaKind::Root { d: 1 })
    }

    /// Bound L with α_{n+1} − α_n ≤ L for all n.
    pub fn lipschitz(&self) -> Option<f64> {
        match &self.kind {
            AlphaKind::Linear | AlphaKind::Root { .. } => Some(1.0),
            AlphaKind::Log => Some(std::f64::consts::LN_2),
            AlphaKind::Explicit { values, extension } => {
                let prefix = values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
                match extension {
                    Extension::Affine { slope } => Some(prefix.max(*slope)),
                    Extension::Ratio { .. } => None,
                }
            }
        }
    }

    /// Concave with α₁ ≥ 0, hence α_{i+j+1} ≤ α_{i+1} + α_{j+1}.
    pub fn is_concave(&self) -> bool {
        match &self.kind {
            AlphaKind::Linear | AlphaKind::Root { .. } | AlphaKind::Log => true,
            AlphaKind::Explicit { values, extension } => {
                // Increments from α₀ = 0 must be nonincreasing.
                let mut prev = f64::INFINITY;
                let mut last = 0.0;
                for &v in values {
                    let inc = v - last;
                    if inc > prev {
                        return false;
                    }
                    prev = inc;
                    last = v;
                }
                matches!(extension, Extension::Affine { slope } if *slope <= prev)
            }
        }
    }

    /// A constant C with α_n ≤ ε·n + C for all n ≥ 1, if one is known.
    pub fn affine_majorant(&self, eps: f64) -> Option<f64> {
        if !(eps > 0.0) {
            return None;
        }
        match &self.kind {
            AlphaKind::Linear | AlphaKind::Root { d: 1 } => (eps >= 1.0).then_some(0.0),
            AlphaKind::Root { d } => {
                if eps >= 1.0 {
                    return Some(0.0);
                }
                let d = *d as f64;
                let t = (1.0 / (d * eps)).powf(d / (d - 1.0));
                Some((t.powf(1.0 / d) - eps * t).max(0.0))
            }
            AlphaKind::Log => {
                if eps >= 1.0 {
                    Some(0.0)
                } else {
                    Some(-eps.ln() - 1.0 + eps)
                }
            }
            AlphaKind::Explicit { values, extension } => match extension {
                Extension::Affine { slope } if eps >= *slope => {
                    let c = values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| v - eps * (i + 1) as f64)
                        .fold(f64::NEG_INFINITY, f64::max);
                    Some(c.max(0.0))
                }
                _ => None,
            },
        }
    }

    /// ln of an upper bound for Σ_{n>m} e^{−c·α_n}, c > 0.
    pub fn ln_exp_tail(&self, c: f64, m: usize) -> Option<f64> {
        if !(c > 0.0) {
            return None;
        }
        // The closed forms are exact; the margin absorbs rounding.
        let v = match &self.kind {
            AlphaKind::Linear | AlphaKind::Root { d: 1 } => {
                Some(-c * (m as f64 + 1.0) - ln_one_minus_exp(-c))
            }
            AlphaKind::Root { d } => {
                // ∫_m^∞ e^{−c t^{1/d}} dt = d·Γ(d,c·x0)/c^d with x0 = m^{1/d}.
                let d = *d as usize;
                let x0 = (m as f64).powf(1.0 / d as f64);
                let cx = c * x0;
                let ln_gamma_d: f64 = (1..d).map(|i| (i as f64).ln()).sum();
                let mut terms = Vec::with_capacity(d);
                let mut ln_fact = 0.0;
                for j in 0..d {
                    if j > 0 {
                        ln_fact += (j as f64).ln();
                    }
                    let lp = if j == 0 { 0.0 } else { j as f64 * cx.ln() };
                    terms.push(lp - ln_fact);
                }
                Some((d as f64).ln() + ln_gamma_d - d as f64 * c.ln() - cx + log_sum_exp(&terms))
            }
            AlphaKind::Log => (c > 1.0).then(|| (1.0 - c) * (m as f64 + 1.0).ln() - (c - 1.0).ln()),
            AlphaKind::Explicit { values, extension } => {
                let len = values.len();
                let prefix: Vec<f64> = (m + 1..=len).map(|n| -c * values[n - 1]).collect();
                let last = values[len - 1];
                let slope = match extension {
                    Extension::Affine { slope } => *slope,
                    // Bernoulli: factor^j ≥ 1 + j(factor − 1).
                    Extension::Ratio { factor } => last * (factor - 1.0),
                };
                if !(slope > 0.0) {
                    return None;
                }
                let n0 = m.max(len);
                let ext =
                    -c * (last + slope * (n0 + 1 - len) as f64) - ln_one_minus_exp(-c * slope);
                Some(ln_add(log_sum_exp(&prefix), ext))
            }
        };
        v.map(|v| v + 1e-12)
    }

    /// Check α ≥ 0 and monotonicity on the first `n` terms.
    pub fn check_prefix(&self, n: usize) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=n {
            let a = self.alpha(i);
            if !(a >= 0.0) || a < prev {
                return Err(Error::InvalidArgument(format!(
                    "α fails monotonicity or sign at n = {i}"
                )));
            }
            prev = a;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceType {
    /// Λ₁(α), weights e^{−α_n/k}
    Finite,
    /// Λ∞(α), weights e^{k·α_n}
    Infinite,
}

/// A power series space of finite or infinite type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(rename = "type")]
    pub space_type: SpaceType,
    pub alpha: ExponentSequence,
}

/// A seminorm value split into the computed part and a rigorous tail bound,
/// both stored as natural logarithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBound {
    #[serde(with = "ext_f64")]
    pub ln_value: f64,
    #[serde(with = "ext_f64")]
    pub ln_tail: f64,
}

impl NormBound {
    pub fn exact(ln_value: f64) -> Self {
        NormBound {
            ln_value,
            ln_tail: f64::NEG_INFINITY,
        }
    }
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
    pub fn tail(&self) -> f64 {
        self.ln_tail.exp()
    }
    pub fn ln_upper(&self) -> f64 {
        ln_add(self.ln_value, self.ln_tail)
    }
    pub fn upper(&self) -> f64 {
        self.ln_upper().exp()
    }
}

impl SpaceSpec {
    pub fn new(space_type: SpaceType, alpha: ExponentSequence) -> Self {
        SpaceSpec { space_type, alpha }
    }

    /// Λ₁(n)
    pub fn lambda1_linear() -> Self {
        SpaceSpec::new(SpaceType::Finite, ExponentSequence::linear())
    }

    /// Λ∞(n)
    pub fn lambda_inf_linear() -> Self {
        SpaceSpec::new(SpaceType::Infinite, ExponentSequence::linear())
    }

    pub fn is_finite_type(&self) -> bool {
        self.space_type == SpaceType::Finite
    }

    /// Exponent s with a_{n,k} = e^{s·α_n}.
    pub fn grade_exponent(&self, k: f64) -> f64 {
        match self.space_type {
            SpaceType::Finite => -1.0 / k,
            SpaceType::Infinite => k,
        }
    }

    pub fn ln_weight(&self, n: usize, k: u32) -> f64 {
        self.grade_exponent(k as f64) * self.alpha.alpha(n)
    }

    /// a_{n,k}
    pub fn weight(&self, n: usize, k: u32) -> f64 {
        self.ln_weight(n, k).exp()
    }

    /// ‖x‖_k with a rigorous bound on the omitted tail.
    pub fn seminorm(&self, x: &Element, k: u32) -> Result<NormBound> {
        seminorm_exponent(&self.alpha, x, self.grade_exponent(k as f64))
    }

    pub fn describe(&self) -> String {
        let t = match self.space_type {
            SpaceType::Finite => "Λ₁",
            SpaceType::Infinite => "Λ∞",
        };
        let a = match self.alpha.kind() {
            AlphaKind::Linear => "n".to_string(),
            AlphaKind::Root { d } => format!("n^(1/{d})"),
            AlphaKind::Log => "ln(n+1)".to_string(),
            AlphaKind::Explicit { .. } => "explicit".to_string(),
        };
        format!("{t}({a})")
    }
}

/// Σ|x_n|·e^{s·α_n} for an element, with tail bound.
pub fn seminorm_exponent(alpha: &ExponentSequence, x: &Element, s: f64) -> Result<NormBound> {
    let ln_tail = x.tail().ln_weighted_tail(alpha, s, x.len())?;
    Ok(NormBound {
        ln_value: ln_weighted_sum(alpha, x.values(), s, 0),
        ln_tail,
    })
}

/// ln Σ_i |v_i|·e^{s·α_{offset+i+1}}.
pub fn ln_weighted_sum(alpha: &ExponentSequence, v: &Coeffs, s: f64, offset: usize) -> f64 {
    let abs: Vec<f64> = v.to_f64_vec().into_iter().map(f64::abs).collect();
    let amax = abs.iter().copied().fold(0.0, f64::max);
    if amax == 0.0 {
        if v.support_len() == 0 {
            return f64::NEG_INFINITY;
        }
        return ln_weighted_sum_slow(alpha, v, s, offset);
    }
    let exps: Vec<f64> = abs
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if a > 0.0 {
                s * alpha.alpha(offset + i + 1)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let wmax = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum = neumaier_sum(abs.iter().zip(&exps).map(|(&a, &e)| {
        if a > 0.0 {
            (a / amax) * (e - wmax).exp()
        } else {
            0.0
        }
    }));
    if sum < 1e-280 {
        return ln_weighted_sum_slow(alpha, v, s, offset);
    }
    sum.ln() + amax.ln() + wmax
}

fn ln_weighted_sum_slow(alpha: &ExponentSequence, v: &Coeffs, s: f64, offset: usize) -> f64 {
    let terms: Vec<f64> = v
        .ln_abs_vec()
        .into_iter()
        .enumerate()
        .filter(|(_, l)| *l > f64::NEG_INFINITY)
        .map(|(i, l)| l + s * alpha.alpha(offset + i + 1))
        .collect();
    log_sum_exp(&terms)
}

/// Stability bound M with α_{2n} ≤ M·α_n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCert {
    pub m: u32,
    pub certified: bool,
    pub prefix_sup: f64,
    /// Indices n ≤ N/2 with α_n = 0, excluded from the ratio.
    pub skipped: Vec<usize>,
}

pub fn stability_constant(alpha: &ExponentSequence, n: usize) -> StabilityCert {
    let n = n.max(2);
    let mut prefix_sup: f64 = 0.0;
    let mut skipped = Vec::new();
    for i in 1..=n / 2 {
        let a = alpha.alpha(i);
        if a == 0.0 {
            skipped.push(i);
            continue;
        }
        prefix_sup = prefix_sup.max(alpha.alpha(2 * i) / a);
    }
    let (m, certified) = match alpha.kind() {
        AlphaKind::Linear | AlphaKind::Root { .. } => (2, true),
        _ => ((prefix_sup.ceil() as u32).max(1), false),
    };
    StabilityCert {
        m,
        certified,
        prefix_sup,
        skipped,
    }
}

/// Nuclearity evidence or certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuclearityCert {
    pub space_type: SpaceType,
    pub nuclear: bool,
    /// Analytic argument rather than prefix evidence.
    pub certified: bool,
    /// Infinite type: index with Σ e^{−m1·α_n} < ∞.
    pub m1: Option<u32>,
    /// Infinite type: upper bound of Σ_{j≥1} e^{−m1·α_j}.
    #[serde(with = "ext_f64::opt")]
    pub d: Option<f64>,
    #[serde(with = "ext_f64::opt")]
    pub partial_sum: Option<f64>,
    /// Finite type: max_{N/2≤n≤N} ln n/α_n. Infinite type: max_{n≤N} ln n/α_n.
    #[serde(with = "ext_f64")]
    pub ratio_evidence: f64,
}

pub fn nuclearity_check(space: &SpaceSpec, n: usize) -> NuclearityCert {
    let n = n.max(2);
    let alpha = &space.alpha;
    let ratio = |i: usize| {
        let a = alpha.alpha(i);
        if a == 0.0 {
            if i == 1 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (i as f64).ln() / a
        }
    };
    match space.space_type {
        SpaceType::Finite => {
            let ratio_evidence = (n / 2..=n).map(ratio).fold(0.0, f64::max);
            // Explicit extensions grow at least linearly, so ln n/α_n → 0.
            let (nuclear, certified) = match alpha.kind() {
                AlphaKind::Linear | AlphaKind::Root { .. } | AlphaKind::Explicit { .. } => {
                    (true, true)
                }
                AlphaKind::Log => (false, false),
            };
            NuclearityCert {
                space_type: SpaceType::Finite,
                nuclear,
                certified,
                m1: None,
                d: None,
                partial_sum: None,
                ratio_evidence,
            }
        }
        SpaceType::Infinite => {
            let ratio_evidence = (1..=n).map(ratio).fold(0.0, f64::max);
            for m1 in 1..=64u32 {
                let c = m1 as f64;
                if let Some(ln_tail) = alpha.ln_exp_tail(c, n) {
                    let partial = neumaier_sum((1..=n).map(|j| (-c * alpha.alpha(j)).exp()));
                    let d = partial + ln_tail.exp();
                    return NuclearityCert {
                        space_type: SpaceType::Infinite,
                        nuclear: true,
                        certified: true,
                        m1: Some(m1),
                        d: Some(d * (1.0 + 4.0 * f64::EPSILON)),
                        partial_sum: Some(partial),
                        ratio_evidence,
                    };
                }
            }
            NuclearityCert {
                space_type: SpaceType::Infinite,
                nuclear: ratio_evidence.is_finite(),
                certified: false,
                m1: None,
                d: None,
                partial_sum: None,
                ratio_evidence,
            }
        }
    }
}

/// D_k = sup_n n·e^{−α_n/(2k)}, used by the finite-type dual bounds.
/// `None` when the supremum is infinite or not known in closed form.
pub fn fnd_constant(alpha: &ExponentSequence, k: u32) -> Option<f64> {
    let two_k = 2.0 * k as f64;
    let f = |n: usize| n as f64 * (-alpha.alpha(n) / two_k).exp();
    let around = |t: f64| {
        let lo = t.floor().max(1.0) as usize;
        f(lo).max(f(lo + 1))
    };
    match alpha.kind() {
        // n·e^{−n/(2k)} peaks at n = 2k.
        AlphaKind::Linear | AlphaKind::Root { d: 1 } => Some(around(two_k)),
        AlphaKind::Root { d } => {
            // Unimodal with peak where n^{1/d} = 2kd.
            let t = (two_k * *d as f64).powi(*d as i32);
            Some(around(t))
        }
        AlphaKind::Log => None,
        AlphaKind::Explicit { values, extension } => {
            let len = values.len();
            let prefix = (1..=len).map(f).fold(0.0, f64::max);
            let slope = match extension {
                Extension::Affine { slope } => *slope,
                Extension::Ratio { factor } => values[len - 1] * (factor - 1.0),
            };
            // Beyond len, α_n ≥ α_len + slope·(n − len); that minorant's peak bounds the rest.
            let last = values[len - 1];
            let g = |n: f64| n * (-(last + slope * (n - len as f64)) / two_k).exp();
            let t = (two_k / slope).max(len as f64);
            Some(prefix.max(g(t)).max(g(len as f64)))
        }
    }
}

/// |β_{n−1}| ≤ C0·e^{m0·α_n} (infinite type) or ≤ C0·e^{−α_n/m0} (finite type).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualCertificate {
    pub c0: f64,
    pub m0: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCheck {
    pub passed: bool,
    pub violation: Option<usize>,
    /// Number of n checked (limited by sampled data).
    pub checked: usize,
    /// The inequality holds for every n, not only the prefix.
    pub certified_all_n: bool,
}

const DUAL_TOL: f64 = 1e-12;

fn ln_dual_target(space: &SpaceSpec, c0: f64, m0: u32, n: usize) -> f64 {
    let a = space.alpha.alpha(n);
    c0.ln()
        + match space.space_type {
            SpaceType::Infinite => m0 as f64 * a,
            SpaceType::Finite => -a / m0 as f64,
        }
}

/// ln C0 needed so that a global envelope implies the certificate for every n.
fn envelope_requirement(space: &SpaceSpec, env: &Envelope, m0: u32) -> Option<f64> {
    let alpha = &space.alpha;
    let m = m0 as f64;
    let ln_c = env.c.ln();
    match (env.decay, space.space_type) {
        (Decay::Exponential { rate }, SpaceType::Infinite) => (rate <= m).then_some(ln_c),
        (Decay::Exponential { rate }, SpaceType::Finite) => (rate <= -1.0 / m).then_some(ln_c),
        (Decay::Geometric { rho }, SpaceType::Infinite) => {
            if rho == 0.0 {
                return Some(ln_c - m * alpha.alpha(1));
            }
            if alpha.is_linear() {
                (rho.ln() <= m).then_some(ln_c - m)
            } else {
                (rho <= 1.0).then_some(ln_c - m * alpha.alpha(1))
            }
        }
        (Decay::Geometric { rho }, SpaceType::Finite) => {
            if rho == 0.0 {
                return Some(ln_c + alpha.alpha(1) / m);
            }
            if rho >= 1.0 {
                return None;
            }
            if alpha.is_linear() {
                (rho.ln() + 1.0 / m <= 0.0).then_some(ln_c + 1.0 / m)
            } else {
                let eps = -m * rho.ln();
                let cmaj = alpha.affine_majorant(eps)?;
                Some(ln_c - rho.ln() + cmaj / m)
            }
        }
    }
}

/// Verify the certificate on n ≤ N and, where the symbol allows, for all n.
pub fn dual_certificate_check(
    space: &SpaceSpec,
    beta: &Symbol,
    cert: &DualCertificate,
    n: usize,
) -> Result<DualCheck> {
    if !(cert.c0 > 0.0) || cert.m0 == 0 {
        return Err(Error::InvalidArgument(
            "dual certificate needs C0 > 0 and m0 ≥ 1".into(),
        ));
    }
    let limit = match beta.readable_len() {
        Some(l) => n.min(l),
        None => n,
    };
    for i in 1..=limit {
        let lb = beta.coeff(i - 1)?.ln_abs();
        let target = ln_dual_target(space, cert.c0, cert.m0, i);
        if lb > target + DUAL_TOL {
            return Ok(DualCheck {
                passed: false,
                violation: Some(i),
                checked: i,
                certified_all_n: false,
            });
        }
    }
    let certified_all_n = match beta {
        Symbol::Finite(c) => c.support_len() <= limit,
        _ => match beta.tail_cert().envelope() {
            Some(env) => envelope_requirement(space, env, cert.m0)
                .is_some_and(|r| cert.c0.ln() >= r - DUAL_TOL),
            None => false,
        },
    };
    Ok(DualCheck {
        passed: true,
        violation: None,
        checked: limit,
        certified_all_n,
    })
}

impl DualCertificate {
    /// Smallest m0 ≤ q_max admitting a certificate valid for every n, with
    /// the tightest C0 on the prefix. Falls back to a prefix-only fit for
    /// sampled symbols without envelopes.
    pub fn fit(space: &SpaceSpec, beta: &Symbol, n: usize, q_max: u32) -> Result<DualCertificate> {
        let limit = match beta.readable_len() {
            Some(l) => n.min(l),
            None => match beta {
                Symbol::Finite(c) => n.max(c.support_len()),
                _ => n,
            },
        };
        let lb: Vec<f64> = (0..limit)
            .map(|i| beta.coeff(i).map(|s| s.ln_abs()))
            .collect::<Result<_>>()?;
        let prefix_c = |m0: u32| {
            lb.iter()
                .enumerate()
                .map(|(i, l)| l - ln_dual_target(space, 1.0, m0, i + 1))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let finite = matches!(beta, Symbol::Finite(_));
        let env = beta.tail_cert().envelope().copied();
        for m0 in 1..=q_max.max(1) {
            let mut ln_c = prefix_c(m0);
            if let (false, Some(e)) = (finite, env) {
                match envelope_requirement(space, &e, m0) {
                    Some(r) => ln_c = ln_c.max(r),
                    None => continue,
                }
            }
            if ln_c == f64::NEG_INFINITY {
                ln_c = 0.0;
            }
            // Leave room for rounding in later comparisons.
            let c0 = ln_c.exp() * (1.0 + 1e-9);
            return Ok(DualCertificate { c0, m0 });
        }
        Err(Error::DualMembershipViolated { n: 1 })
    }
}

/// ‖e_n‖_k = a_{n,k}; convenience used by sweeps.
pub fn ln_basis_norm(space: &SpaceSpec, n: usize, k: f64) -> f64 {
    space.grade_exponent(k) * space.alpha.alpha(n)
}

/// The tail part of an element seminorm, exposed for diagnostics.
pub fn ln_tail_bound(space: &SpaceSpec, tail: &TailCert, k: u32, start: usize) -> Result<f64> {
    tail.ln_weighted_tail(&space.alpha, space.grade_exponent(k as f64), start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Scalar;

    #[test]
    fn weight_examples() {
        let l1 = SpaceSpec::lambda1_linear();
        assert!((l1.weight(3, 2) - 0.22313016014842982).abs() < 1e-15);
        let li = SpaceSpec::lambda_inf_linear();
        assert!((li.weight(2, 3) - 6f64.exp()).abs() < 1e-9);
        let root = SpaceSpec::new(SpaceType::Finite, ExponentSequence::root(2).unwrap());
        assert_eq!(root.weight(4, 1), (-2f64).exp());
    }

    #[test]
    fn seminorm_examples() {
        let l1 = SpaceSpec::lambda1_linear();
        let b = l1.seminorm(&Element::basis(3), 2).unwrap();
        assert_eq!(b.ln_value, -1.5);
        assert_eq!(b.tail(), 0.0);
        let li = SpaceSpec::lambda_inf_linear();
        let x = Element::finite(Coeffs::from_ints(&[1, 1]));
        let v = li.seminorm(&x, 1).unwrap();
        assert!((v.value() - (1f64.exp() + 2f64.exp())).abs() < 1e-12);
        assert_eq!(v.ln_tail, f64::NEG_INFINITY);
    }

    #[test]
    fn ones_with_geometric_tail_converge() {
        let l1 = SpaceSpec::lambda1_linear();
        let want = (-1f64).exp() / (1.0 - (-1f64).exp());
        for n in [4usize, 32, 256] {
            let env = Envelope::geometric(1.0, 1.0).unwrap().with_shift(n);
            let x = Element::new(Coeffs::from_ints(&vec![1; n]), TailCert::Envelope(env)).unwrap();
            let b = l1.seminorm(&x, 1).unwrap();
            assert!(b.value() <= want && b.upper() >= want * (1.0 - 1e-15));
        }
    }

    #[test]
    fn infinite_norm_of_bounded_tail_is_unbounded() {
        let li = SpaceSpec::lambda_inf_linear();
        let env = Envelope::geometric(1.0, 1.0).unwrap().with_shift(2);
        let x = Element::new(Coeffs::from_ints(&[1, 1]), TailCert::Envelope(env)).unwrap();
        assert_eq!(li.seminorm(&x, 1), Err(Error::TailUnbounded));
    }

    #[test]
    fn stability_examples() {
        let s = stability_constant(&ExponentSequence::linear(), 1000);
        assert_eq!((s.m, s.certified), (2, true));
        assert!((s.prefix_sup - 2.0).abs() < 1e-15);
        let r = stability_constant(&ExponentSequence::root(2).unwrap(), 1000);
        assert_eq!((r.m, r.certified), (2, true));
        assert!((r.prefix_sup - 2f64.sqrt()).abs() < 1e-12);
        let pow2: Vec<f64> = (1..=16).map(|n| 2f64.powi(n)).collect();
        let e = ExponentSequence::explicit(pow2, Extension::Ratio { factor: 2.0 }).unwrap();
        let s8 = stability_constant(&e, 8);
        let s16 = stability_constant(&e, 16);
        assert!(!s16.certified);
        assert!(s16.prefix_sup > s8.prefix_sup);
        assert_eq!(s16.prefix_sup, 2f64.powi(8));
    }

    #[test]
    fn log_kind_skips_nothing_but_zero_start_is_recorded() {
        let e = ExponentSequence::explicit(vec![0.0, 1.0, 2.0], Extension::Affine { slope: 1.0 })
            .unwrap();
        let s = stability_constant(&e, 10);
        assert_eq!(s.skipped, vec![1]);
        assert!(s.prefix_sup <= s.m as f64);
    }

    #[test]
    fn nuclearity_examples() {
        let li = nuclearity_check(&SpaceSpec::lambda_inf_linear(), 1000);
        assert_eq!(li.m1, Some(1));
        let d = li.d.unwrap();
        let exact = 1.0 / (1f64.exp() - 1.0);
        assert!(d >= exact && d <= exact * (1.0 + 1e-12));
        assert!(d <= 1f64.exp() / (1f64.exp() - 1.0));
        let l1 = nuclearity_check(&SpaceSpec::lambda1_linear(), 1000);
        assert!(l1.nuclear && l1.certified);
        let lg = nuclearity_check(
            &SpaceSpec::new(SpaceType::Finite, ExponentSequence::log()),
            10000,
        );
        assert!(!lg.nuclear);
        assert!(lg.ratio_evidence > 0.99);
        let lgi = nuclearity_check(
            &SpaceSpec::new(SpaceType::Infinite, ExponentSequence::log()),
            1000,
        );
        assert_eq!(lgi.m1, Some(2));
    }

    #[test]
    fn exp_tail_bounds_brute_force() {
        let kinds = [
            ExponentSequence::linear(),
            ExponentSequence::root(2).unwrap(),
            ExponentSequence::root(3).unwrap(),
            ExponentSequence::log(),
            ExponentSequence::explicit(vec![0.5, 1.0, 1.2], Extension::Affine { slope: 0.5 })
                .unwrap(),
            ExponentSequence::explicit(vec![1.0, 2.0], Extension::Ratio { factor: 1.5 }).unwrap(),
        ];
        for a in &kinds {
            for &c in &[1.5, 3.0] {
                for &m in &[0usize, 1, 7, 40] {
                    let bound = a.ln_exp_tail(c, m).unwrap().exp();
                    let brute = neumaier_sum((m + 1..200_000).map(|n| (-c * a.alpha(n)).exp()));
                    assert!(bound >= brute, "{a:?} c={c} m={m}: {bound} < {brute}");
                }
            }
        }
    }

    #[test]
    fn affine_majorant_is_valid() {
        let kinds = [
            ExponentSequence::root(2).unwrap(),
            ExponentSequence::root(5).unwrap(),
            ExponentSequence::log(),
            ExponentSequence::explicit(vec![0.0, 3.0, 4.0], Extension::Affine { slope: 0.1 })
                .unwrap(),
        ];
        for a in &kinds {
            for &eps in &[0.05, 0.3, 1.0] {
                if let Some(c) = a.affine_majorant(eps) {
                    for n in 1..100_000 {
                        assert!(
                            a.alpha(n) <= eps * n as f64 + c + 1e-12,
                            "{a:?} eps={eps} n={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn fnd_constants_match_brute_force() {
        let a = ExponentSequence::linear();
        for k in 1..=8 {
            let d = fnd_constant(&a, k).unwrap();
            let brute = (1..10_000)
                .map(|n| n as f64 * (-(n as f64) / (2.0 * k as f64)).exp())
                .fold(0.0, f64::max);
            assert!((d - brute).abs() <= 1e-12 * brute);
        }
        let r = ExponentSequence::root(2).unwrap();
        let d = fnd_constant(&r, 1).unwrap();
        let brute = (1..100_000)
            .map(|n| n as f64 * (-(n as f64).sqrt() / 2.0).exp())
            .fold(0.0, f64::max);
        assert!(d >= brute * (1.0 - 1e-12));
    }

    #[test]
    fn dual_certificate_examples() {
        let li = SpaceSpec::lambda_inf_linear();
        let ones = Symbol::geometric(Scalar::int(1), Scalar::int(1));
        let r =
            dual_certificate_check(&li, &ones, &DualCertificate { c0: 1.0, m0: 1 }, 100).unwrap();
        assert!(r.passed && r.certified_all_n);

        let l1 = SpaceSpec::lambda1_linear();
        let h = (-0.5f64).exp();
        let b = Symbol::geometric(Scalar::Float(h), Scalar::Float(h));
        let r = dual_certificate_check(&l1, &b, &DualCertificate { c0: 1.0, m0: 2 }, 100).unwrap();
        assert!(r.passed);

        let r =
            dual_certificate_check(&l1, &ones, &DualCertificate { c0: 1.0, m0: 5 }, 100).unwrap();
        assert_eq!(r.violation, Some(1));
    }

    #[test]
    fn dual_fit_rejects_growth_on_finite_type() {
        let l1 = SpaceSpec::lambda1_linear();
        let grow = Symbol::geometric(Scalar::int(1), Scalar::Float(1f64.exp()));
        assert!(DualCertificate::fit(&l1, &grow, 64, 32).is_err());
        let li = SpaceSpec::lambda_inf_linear();
        let cert = DualCertificate::fit(&li, &grow, 64, 32).unwrap();
        let chk = dual_certificate_check(&li, &grow, &cert, 64).unwrap();
        assert!(chk.passed && chk.certified_all_n);
    }
}
