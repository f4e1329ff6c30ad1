//! Brute-force ground truth: exact rational dense truncations, and replay of
//! classifier justifications against them.
//!
//! Nothing here is on a hot path. Float inputs are converted to the exact
//! rational value of their binary representation.

use num_traits::{One, Signed, Zero};

use crate::classify::{
    CoefficientRule, GrowthRule, HatRoute, Justification, Property, Status, SumKind, Verdict,
};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::num::{ln_abs_rat, log_sum_exp, parse_rational, rat_to_f64, Rational, Scalar};
use crate::operators::{OperatorKind, OperatorSpec};
use crate::spaces::{AlphaKind, SpaceSpec, SpaceType};
use crate::symbols::{SampleExtension, Symbol};

/// Largest truncation the oracle accepts.
pub const MAX_DIM: usize = 512;

/// Relative margin on floating comparisons of weights and closed forms.
pub const REPLAY_MARGIN: f64 = 1e-10;

/// Truncation size, power range and basis range used by replays.
const REPLAY_DIM: usize = 24;
const REPLAY_K: usize = 6;
const REPLAY_N: usize = 8;
const REPLAY_P: u32 = 4;

/// Row-major N×N exact matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTrunc {
    pub n: usize,
    pub m: Vec<Rational>,
    pub source: String,
}

fn rat(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// First n coefficients of a symbol as exact rationals; sampled symbols
/// without a zero extension are padded with zeros only past their data when
/// `pad` is set.
pub fn exact_coeffs(s: &Symbol, n: usize, pad: bool) -> Result<Vec<Rational>> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        match s.coeff(i) {
            Ok(c) => out.push(c.to_rational()?),
            Err(Error::OutOfSampledRange { .. }) if pad => out.push(Rational::zero()),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn known_len(s: &Symbol) -> Option<usize> {
    match s {
        Symbol::Finite(c) => Some(c.support_len()),
        Symbol::Sampled {
            values,
            extension: SampleExtension::Zero,
            ..
        } => Some(values.support_len()),
        _ => None,
    }
}

impl DenseTrunc {
    fn check_dim(n: usize) -> Result<()> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "dense size must lie in 1..={MAX_DIM}, got {n}"
            )));
        }
        Ok(())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::check_dim(n)?;
        Ok(DenseTrunc {
            n,
            m: vec![Rational::zero(); n * n],
            source: "zero".into(),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut d = Self::zeros(n)?;
        for i in 0..n {
            d.m[i * n + i] = Rational::one();
        }
        d.source = "identity".into();
        Ok(d)
    }

    /// (i, j) ↦ θ_{i−j} for i ≥ j plus β_{j−i} for j ≥ i (0-based).
    pub fn from_symbols(theta: Option<&Symbol>, beta: Option<&Symbol>, n: usize) -> Result<Self> {
        Self::check_dim(n)?;
        let t = theta.map(|s| exact_coeffs(s, n, false)).transpose()?;
        let b = beta.map(|s| exact_coeffs(s, n, false)).transpose()?;
        let mut m = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = Rational::zero();
                if let (Some(t), true) = (&t, i >= j) {
                    v += &t[i - j];
                }
                if let (Some(b), true) = (&b, j >= i) {
                    v += &b[j - i];
                }
                m[i * n + j] = v;
            }
        }
        let source = match (theta.is_some(), beta.is_some()) {
            (true, false) => "hat",
            (false, true) => "check",
            _ => "toeplitz",
        };
        Ok(DenseTrunc {
            n,
            m,
            source: source.into(),
        })
    }

    pub fn from_op(op: &OperatorSpec, n: usize) -> Result<Self> {
        match &op.kind {
            OperatorKind::Hat { theta } => Self::from_symbols(Some(theta), None, n),
            OperatorKind::Check { beta } => Self::from_symbols(None, Some(beta), n),
            OperatorKind::Toeplitz { theta, beta } => {
                Self::from_symbols(Some(theta), Some(beta), n)
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.m[i * self.n + j]
    }

    /// Column j (0-based).
    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &DenseTrunc) -> Result<DenseTrunc> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch {} vs {}",
                self.n, other.n
            )));
        }
        let n = self.n;
        let mut m = vec![Rational::zero(); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(l, j);
                    if !b.is_zero() {
                        m[i * n + j] += a * b;
                    }
                }
            }
        }
        Ok(DenseTrunc {
            n,
            m,
            source: format!("{}·{}", self.source, other.source),
        })
    }

    pub fn add(&self, other: &DenseTrunc) -> Result<DenseTrunc> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch {} vs {}",
                self.n, other.n
            )));
        }
        let m = self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect();
        Ok(DenseTrunc {
            n: self.n,
            m,
            source: format!("{}+{}", self.source, other.source),
        })
    }

    pub fn scale(&self, c: &Rational) -> DenseTrunc {
        DenseTrunc {
            n: self.n,
            m: self.m.iter().map(|v| v * c).collect(),
            source: self.source.clone(),
        }
    }

    /// Leading k×k block.
    pub fn block(&self, k: usize) -> Result<DenseTrunc> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidArgument(format!(
                "block size {k} outside 1..={}",
                self.n
            )));
        }
        let m = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Ok(DenseTrunc {
            n: k,
            m,
            source: self.source.clone(),
        })
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    /// Constant along every diagonal.
    pub fn is_toeplitz(&self) -> bool {
        (1..self.n).all(|i| (1..self.n).all(|j| self.get(i, j) == self.get(i - 1, j - 1)))
    }
}

pub fn dense_apply(m: &DenseTrunc, x: &[Rational]) -> Result<Vec<Rational>> {
    if x.len() != m.n {
        return Err(Error::InvalidArgument(format!(
            "vector length {} does not match size {}",
            x.len(),
            m.n
        )));
    }
    Ok((0..m.n)
        .map(|i| {
            x.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .fold(Rational::zero(), |acc, (j, v)| acc + m.get(i, j) * v)
        })
        .collect())
}

/// M^k by binary powering.
pub fn dense_power(m: &DenseTrunc, k: usize) -> Result<DenseTrunc> {
    if k == 0 {
        return Err(Error::InvalidArgument("dense power needs k ≥ 1".into()));
    }
    let mut result: Option<DenseTrunc> = None;
    let mut sq = m.clone();
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some(r) => r.mul(&sq)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        sq = sq.mul(&sq)?;
    }
    let mut r = result.unwrap();
    r.source = format!("({})^{k}", m.source);
    Ok(r)
}

/// (1/k)·Σ_{j=1}^{k} M^j.
pub fn dense_cesaro(m: &DenseTrunc, k: usize) -> Result<DenseTrunc> {
    if k == 0 {
        return Err(Error::InvalidArgument("Cesàro mean needs k ≥ 1".into()));
    }
    let mut pow = m.clone();
    let mut acc = m.clone();
    for _ in 1..k {
        pow = pow.mul(m)?;
        acc = acc.add(&pow)?;
    }
    let mut r = acc.scale(&Rational::new(1.into(), (k as i64).into()));
    r.source = format!("cesaro({}, {k})", m.source);
    Ok(r)
}

/// The stored values of an element as an exact vector of length n.
pub fn element_vector(x: &Element, n: usize) -> Result<Vec<Rational>> {
    if x.len() > n && x.values().support_len() > n {
        return Err(Error::InvalidArgument(format!(
            "element has support beyond {n}"
        )));
    }
    let mut v: Vec<Rational> = x
        .values()
        .to_scalars()
        .iter()
        .take(n)
        .map(Scalar::to_rational)
        .collect::<Result<_>>()?;
    v.resize(n, Rational::zero());
    Ok(v)
}

// ---------------------------------------------------------------- weights

/// ln Σ_i |v_i|·e^{s·α_{i+1}}, summed directly in log space.
fn ln_weighted(space: &SpaceSpec, v: &[Rational], s: f64) -> f64 {
    let terms: Vec<f64> = v
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| ln_abs_rat(c) + s * space.alpha.alpha(i + 1))
        .collect();
    log_sum_exp(&terms)
}

fn le_margin(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REPLAY_MARGIN * rhs.abs().max(f64::MIN_POSITIVE)
}

fn ln_le_margin(ln_lhs: f64, ln_rhs: f64) -> bool {
    ln_lhs == f64::NEG_INFINITY || ln_lhs <= ln_rhs + REPLAY_MARGIN
}

/// Σ|s_i|·e^{s·α_{i+1}} recomputed independently; `None` when no closed form
/// or finite list is available, +∞ when the sum diverges.
fn weighted_sum(space: &SpaceSpec, sym: &Symbol, s: f64) -> Result<Option<f64>> {
    if let Some(len) = known_len(sym) {
        let v = exact_coeffs(sym, len, true)?;
        return Ok(Some(ln_weighted(space, &v, s).exp()));
    }
    match sym {
        Symbol::Geometric { c, r } if matches!(space.alpha.kind(), AlphaKind::Linear) => {
            let x = r.abs_f64() * s.exp();
            Ok(Some(if x >= 1.0 {
                f64::INFINITY
            } else {
                c.abs_f64() * s.exp() / (1.0 - x)
            }))
        }
        Symbol::Geometric { c, r } if s == 0.0 => {
            let ra = r.abs_f64();
            Ok(Some(if ra >= 1.0 {
                f64::INFINITY
            } else {
                c.abs_f64() / (1.0 - ra)
            }))
        }
        _ => Ok(None),
    }
}

/// Exact Σ|s_i| when the symbol has a rational closed form.
fn exact_ell1(sym: &Symbol) -> Result<Option<Rational>> {
    if let Some(len) = known_len(sym) {
        if sym.is_exact() || matches!(sym, Symbol::Finite(_)) {
            let v = exact_coeffs(sym, len, true)?;
            return Ok(Some(
                v.iter()
                    .map(|c| c.abs())
                    .fold(Rational::zero(), |a, b| a + b),
            ));
        }
    }
    if let Symbol::Geometric {
        c: Scalar::Exact(c),
        r: Scalar::Exact(r),
    } = sym
    {
        if r.abs() < Rational::one() {
            return Ok(Some(c.abs() / (Rational::one() - r.abs())));
        }
    }
    Ok(None)
}

fn exact_total(sym: &Symbol) -> Result<Option<Rational>> {
    if let Some(len) = known_len(sym) {
        if sym.is_exact() || matches!(sym, Symbol::Finite(_)) {
            return Ok(Some(
                exact_coeffs(sym, len, true)?
                    .iter()
                    .fold(Rational::zero(), |a, b| a + b),
            ));
        }
    }
    if let Symbol::Geometric {
        c: Scalar::Exact(c),
        r: Scalar::Exact(r),
    } = sym
    {
        if r.abs() < Rational::one() {
            return Ok(Some(c / (Rational::one() - r)));
        }
    }
    Ok(None)
}

/// Exact truncated convolution power of a coefficient prefix.
fn exact_power(base: &[Rational], k: usize) -> Vec<Rational> {
    let n = base.len();
    let mut cur = base.to_vec();
    for _ in 1..k {
        let mut next = vec![Rational::zero(); n];
        for (i, a) in cur.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in base.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    next[i + j] += a * b;
                }
            }
        }
        cur = next;
    }
    cur
}

// ---------------------------------------------------------------- replay

/// Re-evaluate a decisive verdict's justification; `Ok(true)` when every
/// inequality it asserts holds in the oracle.
pub fn replay_verdict(v: &Verdict) -> Result<bool> {
    let j = match (&v.status, &v.justification) {
        (Status::Inconclusive, _) | (_, None) => return Err(Error::NonReplayable),
        (_, Some(j)) => j,
    };
    let q_w = v.witness.and_then(|w| w.q);
    match j {
        Justification::Ell1AtMost {
            symbol,
            upper,
            exact,
        } => replay_ell1_at_most(symbol, *upper, exact.as_deref()),
        Justification::Ell1PartialExceeds { symbol, terms, .. } => {
            let v = exact_coeffs(symbol, *terms, false)?;
            let s = v
                .iter()
                .map(|c| c.abs())
                .fold(Rational::zero(), |a, b| a + b);
            Ok(s > Rational::one())
        }
        Justification::HatBound {
            space,
            symbol,
            route,
            grades,
        } => replay_hat_bound(space, symbol, *route, grades),
        Justification::ScalarPower { space, c } => replay_scalar_power(space, c),
        Justification::PowerGrowth {
            space,
            symbol,
            rule,
            p,
            g,
            k,
        } => replay_power_growth(space, symbol, *rule, *p, *g, *k, q_w.unwrap_or(1)),
        Justification::CauchyMajorant {
            space,
            symbol,
            target,
            q,
            ln_t,
            majorant,
            exact,
            d,
        } => replay_cauchy(
            space,
            symbol,
            *target,
            *q,
            *ln_t,
            *majorant,
            exact.as_deref(),
            *d,
        ),
        Justification::FiniteSupportBound {
            space,
            symbol,
            target,
            q,
            support,
            lip,
            ell1,
            d,
        } => replay_finite_support(space, symbol, *target, *q, *support, *lip, *ell1, *d),
        Justification::CoefficientWitness {
            space,
            symbol,
            rule,
        } => replay_coefficient(space, symbol, *rule, v.witness.and_then(|w| w.k), q_w),
        Justification::SufficientSum {
            space,
            theta,
            beta,
            kind,
            target,
            beta_sum,
            theta_sup,
            total,
            exact,
        } => replay_sufficient_sum(
            space,
            theta,
            beta,
            *kind,
            *target,
            *beta_sum,
            *theta_sup,
            *total,
            exact.as_deref(),
        ),
        Justification::StrongTame { op, rows } => replay_strong_tame(op, rows),
        Justification::Implied { from } => {
            let order = |p: Property| match p {
                Property::Topologizable => 0,
                Property::MTopologizable => 1,
                Property::PowerBounded => 2,
                Property::CesaroBounded => -1,
                Property::StronglyTame => -2,
            };
            let direction_ok = match (v.status, from.status) {
                (Status::Holds, Status::Holds) => {
                    order(from.property) > order(v.property)
                        || (from.property == Property::PowerBounded
                            && v.property == Property::CesaroBounded)
                }
                (Status::Fails, Status::Fails) => {
                    order(from.property) < order(v.property) && order(from.property) >= 0
                }
                _ => false,
            };
            Ok(direction_ok && replay_verdict(from)?)
        }
    }
}

fn replay_ell1_at_most(symbol: &Symbol, upper: f64, exact: Option<&str>) -> Result<bool> {
    if let Some(e) = exact {
        let claimed = parse_rational(e)?;
        let Some(ours) = exact_ell1(symbol)? else {
            return Ok(false);
        };
        if ours != claimed || ours > Rational::one() {
            return Ok(false);
        }
    } else {
        let ours = match exact_ell1(symbol)? {
            Some(q) => rat_to_f64(&q),
            None => match weighted_sum(&SpaceSpec::lambda1_linear(), symbol, 0.0)? {
                Some(v) => v,
                None => upper,
            },
        };
        if !(le_margin(ours, upper) && upper <= 1.0) {
            return Ok(false);
        }
    }
    // Columns of truncated powers keep ℓ¹ ≤ 1.
    let m = DenseTrunc::from_symbols(Some(symbol), None, REPLAY_DIM.min(16))?;
    let mut pow = m.clone();
    for _ in 1..=REPLAY_K {
        for j in 0..REPLAY_N {
            let s = pow
                .column(j)
                .iter()
                .map(|c| c.abs())
                .fold(Rational::zero(), |a, b| a + b);
            if rat_to_f64(&s) > 1.0 + REPLAY_MARGIN {
                return Ok(false);
            }
        }
        pow = pow.mul(&m)?;
    }
    Ok(true)
}

/// ‖col‖_p of an exact vector indexed from basis 1.
fn ln_col_norm(space: &SpaceSpec, col: &[Rational], p: u32) -> f64 {
    ln_weighted(space, col, space.grade_exponent(p as f64))
}

fn ln_e(space: &SpaceSpec, n: usize, q: u32) -> f64 {
    space.grade_exponent(q as f64) * space.alpha.alpha(n)
}

fn replay_hat_bound(
    space: &SpaceSpec,
    symbol: &Symbol,
    route: HatRoute,
    grades: &[crate::classify::GradeConstant],
) -> Result<bool> {
    for g in grades.iter().filter(|g| g.p <= REPLAY_P) {
        let p = g.p as f64;
        let ours = match route {
            HatRoute::FiniteLinear => {
                if space.space_type != SpaceType::Finite
                    || !space.alpha.is_linear()
                    || g.q != 2 * g.p
                {
                    return Ok(false);
                }
                weighted_sum(&SpaceSpec::lambda1_linear(), symbol, -1.0 / (2.0 * p))?
                    .map(|v| v * (1.0 / (2.0 * p)).exp())
            }
            HatRoute::FiniteEll1 => {
                if space.space_type != SpaceType::Finite || g.q != g.p {
                    return Ok(false);
                }
                match exact_ell1(symbol)? {
                    Some(q) => Some(rat_to_f64(&q)),
                    None => weighted_sum(space, symbol, 0.0)?,
                }
            }
            HatRoute::InfiniteSubadditive => {
                if space.space_type != SpaceType::Infinite
                    || g.q != g.p
                    || !subadditive_prefix(space)
                {
                    return Ok(false);
                }
                weighted_sum(space, symbol, p)?
            }
        };
        if let Some(c) = ours {
            if !le_margin(c, g.c) {
                return Ok(false);
            }
        }
        let m = DenseTrunc::from_symbols(Some(symbol), None, REPLAY_DIM)?;
        let mut pow = m.clone();
        for k in 1..=REPLAY_K {
            for n in 1..=REPLAY_N {
                let lhs = ln_col_norm(space, &pow.column(n - 1), g.p);
                let rhs = k as f64 * g.c.ln() + ln_e(space, n, g.q);
                if !ln_le_margin(lhs, rhs) {
                    return Ok(false);
                }
            }
            pow = pow.mul(&m)?;
        }
    }
    Ok(true)
}

fn subadditive_prefix(space: &SpaceSpec) -> bool {
    let a = |n: usize| if n == 0 { 0.0 } else { space.alpha.alpha(n) };
    (1..=48).all(|i| (1..=48).all(|j| a(i + j) <= a(i) + a(j) + 1e-12))
}

fn replay_scalar_power(space: &SpaceSpec, c: &Scalar) -> Result<bool> {
    let cq = c.to_rational()?;
    if cq.abs() > Rational::one() {
        return Ok(false);
    }
    let sym = Symbol::delta(Scalar::Exact(cq));
    let m = DenseTrunc::from_symbols(Some(&sym), None, REPLAY_N)?;
    let mut pow = m.clone();
    for _ in 1..=REPLAY_K {
        for n in 1..=REPLAY_N {
            for p in 1..=REPLAY_P {
                if !ln_le_margin(ln_col_norm(space, &pow.column(n - 1), p), ln_e(space, n, p)) {
                    return Ok(false);
                }
            }
        }
        pow = pow.mul(&m)?;
    }
    Ok(true)
}

fn replay_power_growth(
    space: &SpaceSpec,
    symbol: &Symbol,
    rule: GrowthRule,
    p: u32,
    g: f64,
    k: usize,
    q: u32,
) -> Result<bool> {
    if space.space_type != SpaceType::Infinite || !(g > 1.0) {
        return Ok(false);
    }
    let alpha1 = space.alpha.alpha(1);
    let (ln_base, identity_ok) = match rule {
        GrowthRule::SumExceedsOne => {
            let ok = match exact_total(symbol)? {
                Some(s) => s.abs() > Rational::one() && le_margin(g, rat_to_f64(&s.abs())),
                None => true,
            };
            // Σ(θ^{*j}) = (Σθ)^j on finite exact symbols.
            let ident = match (known_len(symbol), exact_total(symbol)?) {
                (Some(len), Some(s)) => {
                    let base = exact_coeffs(symbol, len.max(1) * 4, true)?;
                    (1..=4).all(|j| {
                        let pw = exact_power(&base, j);
                        pw.iter().fold(Rational::zero(), |a, b| a + b)
                            == num_traits::pow(s.clone(), j)
                    })
                }
                _ => true,
            };
            (p as f64 * alpha1, ok && ident)
        }
        GrowthRule::LowestCoefficient { index } => {
            let v = exact_coeffs(symbol, index + 1, true)?;
            let ok = v[..index].iter().all(Zero::is_zero) && v[index].abs() > Rational::one();
            let ok = ok && le_margin(g, rat_to_f64(&v[index].abs()));
            let ident = lowest_power_identity(symbol, index, 4)?;
            (p as f64 * alpha1, ok && ident)
        }
        GrowthRule::TopCoefficient { index } => {
            if !space.alpha.is_linear() || known_len(symbol) != Some(index + 1) || index == 0 {
                return Ok(false);
            }
            let v = exact_coeffs(symbol, index + 1, true)?;
            let ln_g = ln_abs_rat(&v[index]) + p as f64 * index as f64;
            let ok = ln_g > 0.0 && le_margin(g.ln(), ln_g);
            // (θ^{*j})_{j·d} = θ_d^j
            let ident = (1..=4).all(|j| {
                let mut base = v.clone();
                base.resize(j * index + 1, Rational::zero());
                exact_power(&base, j)[j * index] == num_traits::pow(v[index].clone(), j)
            });
            (p as f64, ok && ident)
        }
    };
    // ‖θ^{*k}‖_p ≥ base·g^k exceeds ‖e₁‖_q.
    let exceeds = ln_base + k as f64 * g.ln() > q as f64 * alpha1;
    Ok(identity_ok && exceeds)
}

/// (θ^{*j})_{j·d} = θ_d^j when θ vanishes below d.
fn lowest_power_identity(symbol: &Symbol, d: usize, j_max: usize) -> Result<bool> {
    for j in 1..=j_max {
        let len = j * d + 1;
        let base = exact_coeffs(symbol, len, true)?;
        if exact_power(&base, j)[j * d] != num_traits::pow(base[d].clone(), j) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// |β^{*k}_{n−1}| ≤ d^k·w_q(n) on the replay window.
fn pointwise_power_bound(space: &SpaceSpec, symbol: &Symbol, q: u32, d: f64) -> Result<bool> {
    let base = exact_coeffs(symbol, REPLAY_DIM, true)?;
    for k in 1..=REPLAY_K {
        let pw = exact_power(&base, k);
        for (m, c) in pw.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let rhs = k as f64 * d.ln() + ln_e(space, m + 1, q);
            if !ln_le_margin(ln_abs_rat(c), rhs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn replay_cauchy(
    space: &SpaceSpec,
    symbol: &Symbol,
    target: Property,
    q: u32,
    ln_t: f64,
    majorant: f64,
    exact: Option<&str>,
    d: f64,
) -> Result<bool> {
    let qf = q as f64;
    let expected_t = match (space.space_type, space.alpha.is_linear()) {
        (SpaceType::Infinite, true) => -qf,
        (SpaceType::Finite, true) => 1.0 / qf,
        (SpaceType::Infinite, false) => 0.0,
        (SpaceType::Finite, false) => return Ok(false),
    };
    if ln_t != expected_t {
        return Ok(false);
    }
    // M(t) = e^{−ln t}·Σ|β_i|e^{ln t·(i+1)} on the linear scale.
    let ours = match exact {
        Some(e) => {
            let claimed = parse_rational(e)?;
            let scalar = known_len(symbol).is_some_and(|l| l <= 1);
            if exact_ell1(symbol)? != Some(claimed.clone()) || (!scalar && ln_t != 0.0) {
                return Ok(false);
            }
            Some(rat_to_f64(&claimed))
        }
        None => {
            weighted_sum(&SpaceSpec::lambda_inf_linear(), symbol, ln_t)?.map(|v| v * (-ln_t).exp())
        }
    };
    if let Some(m) = ours {
        if !le_margin(m, majorant) {
            return Ok(false);
        }
    }
    let shift = if space.space_type == SpaceType::Finite {
        1.0 / qf
    } else {
        0.0
    };
    let target_ok = match target {
        Property::PowerBounded => {
            d == 1.0
                && match exact {
                    Some(e) if shift == 0.0 => parse_rational(e)? <= Rational::one(),
                    Some(e) if parse_rational(e)?.is_zero() => true,
                    _ => majorant * shift.exp() <= 1.0,
                }
        }
        Property::MTopologizable | Property::Topologizable => {
            le_margin(majorant.max(1.0) * shift.exp(), d)
        }
        _ => false,
    };
    Ok(target_ok && pointwise_power_bound(space, symbol, q, d)?)
}

#[allow(clippy::too_many_arguments)]
fn replay_finite_support(
    space: &SpaceSpec,
    symbol: &Symbol,
    target: Property,
    q: u32,
    support: usize,
    lip: f64,
    ell1: f64,
    d: f64,
) -> Result<bool> {
    if space.space_type != SpaceType::Finite || known_len(symbol) != Some(support) {
        return Ok(false);
    }
    let lip_ok = (1..=256).all(|n| space.alpha.alpha(n + 1) - space.alpha.alpha(n) <= lip + 1e-12);
    let ours = rat_to_f64(&exact_ell1(symbol)?.unwrap_or_else(Rational::zero));
    if !lip_ok || !le_margin(ours, ell1) {
        return Ok(false);
    }
    let span = space.alpha.alpha(1) + lip * support.saturating_sub(1) as f64;
    let target_ok = match target {
        Property::PowerBounded => {
            d == 1.0 && (ell1 == 0.0 || ell1.ln() + span / q as f64 <= REPLAY_MARGIN)
        }
        Property::MTopologizable | Property::Topologizable => {
            le_margin(ell1.max(1.0) * (span / q as f64).exp(), d)
        }
        _ => false,
    };
    Ok(target_ok && pointwise_power_bound(space, symbol, q, d)?)
}

fn replay_coefficient(
    space: &SpaceSpec,
    symbol: &Symbol,
    rule: CoefficientRule,
    k: Option<usize>,
    q: Option<u32>,
) -> Result<bool> {
    match rule {
        CoefficientRule::LeadingAboveOne => {
            let b0 = symbol.coeff(0)?.to_rational()?;
            if b0.abs() <= Rational::one() {
                return Ok(false);
            }
            let base = exact_coeffs(symbol, 1, true)?;
            let ident = (1..=4).all(|j| exact_power(&base, j)[0] == num_traits::pow(b0.clone(), j));
            let witness_ok = match (k, q) {
                (Some(k), Some(q)) => k as f64 * ln_abs_rat(&b0) > ln_e(space, 1, q),
                _ => true,
            };
            Ok(ident && witness_ok)
        }
        CoefficientRule::LeadingUnitWithTail { index } => {
            if index == 0 {
                return Ok(false);
            }
            let v = exact_coeffs(symbol, index + 1, true)?;
            if v[0].abs() != Rational::one()
                || !v[1..index].iter().all(Zero::is_zero)
                || v[index].is_zero()
            {
                return Ok(false);
            }
            // (β^{*k})_d = k·β₀^{k−1}·β_d
            Ok((1..=REPLAY_K).all(|j| {
                exact_power(&v, j)[index]
                    == rat(j as i64) * num_traits::pow(v[0].clone(), j - 1) * &v[index]
            }))
        }
        CoefficientRule::CoefficientAtLeastOne { index } => {
            let c = symbol.coeff(index)?.to_rational()?;
            Ok(space.space_type == SpaceType::Finite
                && c.abs() >= Rational::one()
                && space.alpha.alpha(index + 1) > 0.0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn replay_sufficient_sum(
    space: &SpaceSpec,
    theta: &Symbol,
    beta: &Symbol,
    kind: SumKind,
    target: Property,
    beta_sum: f64,
    theta_sup: f64,
    total: f64,
    exact: Option<&str>,
) -> Result<bool> {
    if !space.alpha.is_linear() {
        return Ok(false);
    }
    let ours_beta = match kind {
        SumKind::A if space.space_type == SpaceType::Infinite => match exact_ell1(beta)? {
            Some(q) => Some(rat_to_f64(&q)),
            None => weighted_sum(space, beta, 0.0)?,
        },
        SumKind::B if space.space_type == SpaceType::Finite => weighted_sum(space, beta, 1.0)?,
        _ => return Ok(false),
    };
    if let Some(b) = ours_beta {
        if !le_margin(b, beta_sum) {
            return Ok(false);
        }
    }
    let ours_theta = match space.space_type {
        SpaceType::Finite => exact_ell1(theta)?
            .map(|q| rat_to_f64(&q))
            .or(weighted_sum(space, theta, 0.0)?),
        SpaceType::Infinite => Some(if theta.is_zero() { 0.0 } else { f64::INFINITY }),
    };
    if let Some(t) = ours_theta {
        if !le_margin(t, theta_sup) {
            return Ok(false);
        }
    }
    let ok = match target {
        Property::MTopologizable => beta_sum.is_finite(),
        Property::PowerBounded => match exact {
            Some(e) => parse_rational(e)? <= Rational::one(),
            None => le_margin(theta_sup + beta_sum, total) && total <= 1.0,
        },
        _ => false,
    };
    if !ok {
        return Ok(false);
    }
    // One application: ‖Te_n‖_p ≤ (C_p(θ) + sum)·‖e_n‖_p on the truncation.
    let op = OperatorSpec::unchecked(
        space.clone(),
        OperatorKind::Toeplitz {
            theta: theta.clone(),
            beta: beta.clone(),
        },
    );
    for p in 1..=REPLAY_P {
        let hat_c = match space.space_type {
            SpaceType::Finite => theta_sup,
            SpaceType::Infinite => weighted_sum(space, theta, p as f64)?.unwrap_or(f64::INFINITY),
        };
        if !dense_column_bound(&op, p, hat_c + beta_sum)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// ‖Te_n‖_p ≤ c·‖e_n‖_p for n ≤ REPLAY_N on the exact truncation.
fn dense_column_bound(op: &OperatorSpec, p: u32, c: f64) -> Result<bool> {
    let m = DenseTrunc::from_op(op, REPLAY_DIM)?;
    for n in 1..=REPLAY_N {
        let lhs = ln_col_norm(&op.space, &m.column(n - 1), p);
        if !ln_le_margin(lhs, c.ln() + ln_e(&op.space, n, p)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn replay_strong_tame(op: &OperatorSpec, rows: &[crate::classify::TameRow]) -> Result<bool> {
    let space = &op.space;
    for r in rows.iter().filter(|r| r.p <= REPLAY_P) {
        let Some(bound) = r.bound else {
            return Ok(false);
        };
        if !bound.is_finite() || !le_margin(r.c_hat, bound) {
            return Ok(false);
        }
        let p = r.p as f64;
        let hat = |theta: &Symbol| -> Result<Option<f64>> {
            Ok(match space.space_type {
                SpaceType::Finite if space.alpha.is_linear() => {
                    weighted_sum(&SpaceSpec::lambda1_linear(), theta, -1.0 / (2.0 * p))?
                        .map(|v| v * (1.0 / (2.0 * p)).exp())
                }
                SpaceType::Finite => exact_ell1(theta)?.map(|q| rat_to_f64(&q)),
                SpaceType::Infinite if subadditive_prefix(space) => weighted_sum(space, theta, p)?,
                SpaceType::Infinite => Some(f64::INFINITY),
            })
        };
        let check = |beta: &Symbol| -> Result<Option<f64>> {
            Ok(match space.space_type {
                SpaceType::Infinite => exact_ell1(beta)?
                    .map(|q| rat_to_f64(&q))
                    .or(weighted_sum(space, beta, 0.0)?),
                SpaceType::Finite if subadditive_prefix(space) => weighted_sum(space, beta, 1.0)?,
                SpaceType::Finite => Some(f64::INFINITY),
            })
        };
        let ours = match &op.kind {
            OperatorKind::Hat { theta } => hat(theta)?,
            OperatorKind::Check { beta } => check(beta)?,
            OperatorKind::Toeplitz { theta, beta } => match (hat(theta)?, check(beta)?) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        };
        if let Some(b) = ours {
            if !le_margin(b, bound) {
                return Ok(false);
            }
        }
        if !dense_column_bound(op, r.p, bound)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{
        classify_hat_power_bounded_finite, classify_hat_power_bounded_infinite, GridParams,
    };
    use crate::exec::Exec;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn apply_examples() {
        let id = DenseTrunc::identity(4).unwrap();
        let x = vec![r(1, 2), r(3, 1), r(0, 1), r(-1, 5)];
        assert_eq!(dense_apply(&id, &x).unwrap(), x);
        let shift = DenseTrunc::from_symbols(Some(&Symbol::from_ints(&[0, 1])), None, 4).unwrap();
        assert_eq!(
            dense_apply(&shift, &[r(1, 1), r(0, 1), r(0, 1), r(0, 1)]).unwrap(),
            vec![r(0, 1), r(1, 1), r(0, 1), r(0, 1)]
        );
        let b = DenseTrunc::from_symbols(Some(&Symbol::from_ints(&[1, 1])), None, 4).unwrap();
        let sq = dense_power(&b, 2).unwrap();
        let e1 = vec![r(1, 1), r(0, 1), r(0, 1), r(0, 1)];
        assert_eq!(
            dense_apply(&sq, &e1).unwrap(),
            vec![r(1, 1), r(2, 1), r(1, 1), r(0, 1)]
        );
        assert!(dense_apply(&sq, &e1[..2]).is_err());
    }

    #[test]
    fn power_and_cesaro_examples() {
        let id = DenseTrunc::identity(5).unwrap();
        assert_eq!(dense_power(&id, 7).unwrap().m, id.m);
        let c = r(2, 3);
        let ces = dense_cesaro(&id.scale(&c), 2).unwrap();
        assert_eq!(
            ces.m,
            id.scale(&((c.clone() + c.clone() * c.clone()) / r(2, 1))).m
        );
        let b = DenseTrunc::from_symbols(Some(&Symbol::from_ints(&[1, 1])), None, 6).unwrap();
        let p3 = dense_power(&b, 3).unwrap();
        assert_eq!(
            p3.column(0)[..5],
            [r(1, 1), r(3, 1), r(3, 1), r(1, 1), r(0, 1)]
        );
    }

    #[test]
    fn toeplitz_structure() {
        let t = Symbol::from_ints(&[1, 2, 3]);
        let b = Symbol::from_ints(&[0, 5, 7]);
        let h = DenseTrunc::from_symbols(Some(&t), None, 6).unwrap();
        let c = DenseTrunc::from_symbols(None, Some(&b), 6).unwrap();
        assert!(h.is_lower_triangular() && h.is_toeplitz());
        assert!(c.is_upper_triangular() && c.is_toeplitz());
        // Truncation commutes with powers for triangular matrices.
        for k in 1..=6 {
            let big =
                dense_power(&DenseTrunc::from_symbols(Some(&t), None, 12).unwrap(), k).unwrap();
            assert_eq!(big.block(6).unwrap().m, dense_power(&h, k).unwrap().m);
            let big =
                dense_power(&DenseTrunc::from_symbols(None, Some(&b), 12).unwrap(), k).unwrap();
            assert_eq!(big.block(6).unwrap().m, dense_power(&c, k).unwrap().m);
        }
    }

    #[test]
    fn replay_examples() {
        let g = GridParams::default();
        let l1 = SpaceSpec::lambda1_linear();
        let geo = Symbol::geometric(Scalar::ratio(1, 2), Scalar::ratio(1, 2));
        let v = classify_hat_power_bounded_finite(&l1, &geo, &g).unwrap();
        assert_eq!(replay_verdict(&v), Ok(true));
        let li = SpaceSpec::lambda_inf_linear();
        let v = classify_hat_power_bounded_infinite(
            &li,
            &Symbol::delta(Scalar::int(2)),
            &g,
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!(v.status, Status::Fails);
        assert_eq!(replay_verdict(&v), Ok(true));
        let theta = Symbol::from_scalars(&[Scalar::ratio(1, 3), Scalar::ratio(1, 5)]);
        let sp = SpaceSpec::new(
            SpaceType::Infinite,
            crate::spaces::ExponentSequence::root(2).unwrap(),
        );
        let grid = GridParams {
            n: 16,
            k: 4,
            p: 2,
            q: 2,
            tol: 1e-9,
        };
        let v = classify_hat_power_bounded_infinite(&sp, &theta, &grid, Exec::Sequential).unwrap();
        assert_eq!(v.status, Status::Inconclusive);
        assert_eq!(replay_verdict(&v), Err(Error::NonReplayable));
    }

    #[test]
    fn tampered_justification_fails_replay() {
        let g = GridParams::default();
        let l1 = SpaceSpec::lambda1_linear();
        let mut v =
            classify_hat_power_bounded_finite(&l1, &Symbol::from_ints(&[1, 1]), &g).unwrap();
        if let Some(Justification::Ell1PartialExceeds { terms, .. }) = &mut v.justification {
            *terms = 1;
        }
        assert_eq!(replay_verdict(&v), Ok(false));
    }
}
