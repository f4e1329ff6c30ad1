//! Three-valued classification: topologizable, m-topologizable, power
//! bounded, Cesàro bounded and strongly tame, plus mean-ergodicity probes.
//!
//! Decisive verdicts (Holds or Fails) carry a [`Justification`] that the
//! oracle module can replay. Grid sweeps only ever feed [`Evidence`].

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::num::{
    convolve_slices, ext_f64, format_rational, ln_abs_rat, rat_to_f64, Coeffs, Rational, Scalar,
};
use crate::operators::{add_aligned, orbit, orbit_elements, OperatorKind, OperatorSpec};
use crate::spaces::{ln_basis_norm, ln_weighted_sum, SpaceSpec, SpaceType};
use crate::symbols::{
    ell1_norm_in, symbol_seminorm, symbol_seminorm_exponent, Ell1, Symbol, SymbolNorm,
};

/// Longest prefix scanned when looking for a partial sum or coefficient witness.
pub const SCAN_LIMIT: usize = 10_000;

/// Relative margin for comparisons of closed-form bounds against sweeps.
const BOUND_MARGIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Topologizable,
    MTopologizable,
    PowerBounded,
    CesaroBounded,
    StronglyTame,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Topologizable => "topologizable",
            Property::MTopologizable => "m-topologizable",
            Property::PowerBounded => "power bounded",
            Property::CesaroBounded => "Cesàro bounded",
            Property::StronglyTame => "strongly tame",
        }
    }
}

/// Sweep bounds: N basis vectors, K powers, P grades, Q candidate grades.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridParams {
    pub n: usize,
    pub k: usize,
    pub p: u32,
    pub q: u32,
    pub tol: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            n: 256,
            k: 64,
            p: 8,
            q: 32,
            tol: 1e-9,
        }
    }
}

impl GridParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.p == 0 || self.q == 0 {
            return Err(Error::InvalidArgument(
                "grid bounds N, K, P, Q must be ≥ 1".into(),
            ));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(Error::InvalidArgument(format!(
                "tol must lie in (0, 1e-6], got {}",
                self.tol
            )));
        }
        Ok(())
    }

    /// Every axis doubled.
    pub fn doubled(&self) -> GridParams {
        GridParams {
            n: 2 * self.n,
            k: 2 * self.k,
            p: 2 * self.p,
            q: 2 * self.q,
            tol: self.tol,
        }
    }
}

/// A grid point (k, n, p, q) at which a necessary condition breaks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub p: Option<u32>,
    pub q: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(with = "ext_f64")]
    pub value: f64,
}

impl EvidenceRow {
    fn new(label: &str, value: f64) -> Self {
        EvidenceRow {
            label: label.into(),
            k: None,
            n: None,
            p: None,
            q: None,
            value,
        }
    }
    fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }
    fn p(mut self, p: u32) -> Self {
        self.p = Some(p);
        self
    }
    fn q(mut self, q: u32) -> Self {
        self.q = Some(q);
        self
    }
}

/// Grid metadata, the binding quantity of an undecided case, and sweep rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub grid: GridParams,
    pub binding: Option<String>,
    pub rows: Vec<EvidenceRow>,
    pub notes: Vec<String>,
}

impl Evidence {
    pub fn new(grid: &GridParams) -> Self {
        Evidence {
            grid: *grid,
            binding: None,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// How the per-grade constant of T̂_θ was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HatRoute {
    /// Λ₁(n): C_p = Σ|θ_i|e^{−i/(2p)} = e^{1/(2p)}‖θ‖_{2p}, q = 2p.
    FiniteLinear,
    /// Λ₁(α): C_p = Σ|θ_i|, q = p.
    FiniteEll1,
    /// Λ∞(α), α concave: C_p = ‖θ‖_p, q = p.
    InfiniteSubadditive,
}

/// ‖T̂^k e_n‖_p ≤ c^k·‖e_n‖_q.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradeConstant {
    pub p: u32,
    pub q: u32,
    #[serde(with = "ext_f64")]
    pub c: f64,
    /// ‖θ‖_q through the embedding.
    #[serde(with = "ext_f64")]
    pub norm_q: f64,
}

/// Which lower bound forces ‖θ^{*k}‖_p to grow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthRule {
    /// ‖θ^{*k}‖_p ≥ e^{pα₁}|Σθ|^k.
    SumExceedsOne,
    /// θ_i = 0 below `index`: (θ^{*k})_{k·index} = θ_index^k.
    LowestCoefficient { index: usize },
    /// α = n, finite θ of degree `index`: ‖θ^{*k}‖_p ≥ e^p·(|θ_d|e^{pd})^k.
    TopCoefficient { index: usize },
}

/// Coefficient facts that defeat power boundedness of Ť_β.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientRule {
    /// |β₀| > 1: |β^{*k}_0| = |β₀|^k.
    LeadingAboveOne,
    /// |β₀| = 1 and β_index is the lowest other nonzero coefficient:
    /// |β^{*k}_index| = k·|β_index|.
    LeadingUnitWithTail { index: usize },
    /// Finite type: |β_index| ≥ 1 while e^{−α_{index+1}/q} < 1.
    CoefficientAtLeastOne { index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumKind {
    /// A = Σ|β_i|
    A,
    /// B = Σ|β_i|e^{i+1}
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TameRow {
    pub p: u32,
    /// max_{n≤N} ‖Te_n‖_p/‖e_n‖_p
    #[serde(with = "ext_f64")]
    pub c_hat: f64,
    #[serde(with = "ext_f64::opt")]
    pub bound: Option<f64>,
}

/// Machine-checkable reason behind a decisive verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    /// Σ|θ_i| ≤ 1.
    Ell1AtMost {
        symbol: Symbol,
        #[serde(with = "ext_f64")]
        upper: f64,
        exact: Option<String>,
    },
    /// Σ_{i<terms}|θ_i| > 1.
    Ell1PartialExceeds {
        symbol: Symbol,
        terms: usize,
        #[serde(with = "ext_f64")]
        partial: f64,
        exact: Option<String>,
    },
    HatBound {
        space: SpaceSpec,
        symbol: Symbol,
        route: HatRoute,
        grades: Vec<GradeConstant>,
    },
    /// θ = c·δ₀ with |c| ≤ 1 (or > 1 for the failing side).
    ScalarPower {
        space: SpaceSpec,
        c: Scalar,
    },
    PowerGrowth {
        space: SpaceSpec,
        symbol: Symbol,
        rule: GrowthRule,
        p: u32,
        /// Growth factor g > 1.
        #[serde(with = "ext_f64")]
        g: f64,
        /// First k with ‖θ^{*k}‖_p > ‖e₁‖_Q.
        k: usize,
    },
    /// |β^{*k}_m| ≤ M^k·t^{−m} with M = Σ|β_i|t^i, giving
    /// |β^{*k}_{n−1}| ≤ d^k·w_q(n).
    CauchyMajorant {
        space: SpaceSpec,
        symbol: Symbol,
        target: Property,
        q: u32,
        #[serde(with = "ext_f64")]
        ln_t: f64,
        #[serde(with = "ext_f64")]
        majorant: f64,
        exact: Option<String>,
        #[serde(with = "ext_f64")]
        d: f64,
    },
    /// Finite β with support below `support`, α with Lipschitz bound `lip`.
    FiniteSupportBound {
        space: SpaceSpec,
        symbol: Symbol,
        target: Property,
        q: u32,
        support: usize,
        #[serde(with = "ext_f64")]
        lip: f64,
        #[serde(with = "ext_f64")]
        ell1: f64,
        #[serde(with = "ext_f64")]
        d: f64,
    },
    CoefficientWitness {
        space: SpaceSpec,
        symbol: Symbol,
        rule: CoefficientRule,
    },
    /// Sufficient conditions for the sum T̂_θ + Ť_β.
    SufficientSum {
        space: SpaceSpec,
        theta: Symbol,
        beta: Symbol,
        kind: SumKind,
        target: Property,
        #[serde(with = "ext_f64")]
        beta_sum: f64,
        #[serde(with = "ext_f64")]
        theta_sup: f64,
        #[serde(with = "ext_f64")]
        total: f64,
        exact: Option<String>,
    },
    StrongTame {
        op: OperatorSpec,
        rows: Vec<TameRow>,
    },
    Implied {
        from: Box<Verdict>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub property: Property,
    pub status: Status,
    pub certificate: String,
    pub justification: Option<Justification>,
    pub witness: Option<Witness>,
    pub evidence: Evidence,
}

impl Verdict {
    fn holds(
        property: Property,
        certificate: String,
        j: Justification,
        evidence: Evidence,
    ) -> Self {
        Verdict {
            property,
            status: Status::Holds,
            certificate,
            justification: Some(j),
            witness: None,
            evidence,
        }
    }

    fn fails(
        property: Property,
        certificate: String,
        j: Justification,
        witness: Witness,
        evidence: Evidence,
    ) -> Self {
        Verdict {
            property,
            status: Status::Fails,
            certificate,
            justification: Some(j),
            witness: Some(witness),
            evidence,
        }
    }

    fn inconclusive(property: Property, binding: String, mut evidence: Evidence) -> Self {
        evidence.binding = Some(binding.clone());
        Verdict {
            property,
            status: Status::Inconclusive,
            certificate: binding,
            justification: None,
            witness: None,
            evidence,
        }
    }

    pub fn is_decisive(&self) -> bool {
        self.status != Status::Inconclusive
    }

    fn relabel(mut self, property: Property) -> Self {
        self.property = property;
        self
    }

    /// The same status for a weaker (Holds) or stronger (Fails) property.
    fn implied(from: &Verdict, property: Property) -> Verdict {
        let evidence = Evidence {
            notes: vec![],
            rows: vec![],
            binding: None,
            grid: from.evidence.grid,
        };
        Verdict {
            property,
            status: from.status,
            certificate: format!(
                "{} {} implies {} {}",
                from.property.name(),
                status_word(from.status),
                property.name(),
                status_word(from.status)
            ),
            justification: Some(Justification::Implied {
                from: Box::new(from.clone()),
            }),
            witness: from.witness,
            evidence,
        }
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Holds => "holds",
        Status::Fails => "fails",
        Status::Inconclusive => "undecided",
    }
}

fn exact_string(q: &Rational) -> Option<String> {
    Some(format_rational(q))
}

/// Σθ as an exact rational when a closed form exists.
pub fn exact_sum(s: &Symbol) -> Option<Rational> {
    match s {
        Symbol::Finite(Coeffs::Exact(v)) => Some(v.iter().fold(Rational::zero(), |a, b| a + b)),
        Symbol::Geometric {
            c: Scalar::Exact(c),
            r: Scalar::Exact(r),
        } if r.abs() < Rational::one() => Some(c / (Rational::one() - r)),
        _ => None,
    }
}

/// First m ≤ SCAN_LIMIT with Σ_{i<m}|s_i| > 1 (exactly, or by more than tol).
fn partial_sum_exceeding(s: &Symbol, tol: f64) -> Result<Option<(usize, f64, Option<Rational>)>> {
    let limit = match s {
        Symbol::Finite(c) => c.support_len(),
        _ => s.readable_len().unwrap_or(SCAN_LIMIT).min(SCAN_LIMIT),
    };
    let exact = s.is_exact();
    let mut acc_q = Rational::zero();
    let mut acc_f = 0.0f64;
    let one = Rational::one();
    for i in 0..limit {
        let c = s.coeff(i)?;
        if exact {
            acc_q += c.as_exact().expect("exact symbol").abs();
            if acc_q > one {
                return Ok(Some((i + 1, rat_to_f64(&acc_q), Some(acc_q))));
            }
        } else {
            acc_f += c.abs_f64();
            if acc_f > 1.0 + tol {
                return Ok(Some((i + 1, acc_f, None)));
            }
        }
    }
    Ok(None)
}

fn ell1_certificate(e: &Ell1) -> String {
    match &e.exact {
        Some(q) => format_rational(q),
        None => format!("{:.12}", e.upper()),
    }
}

// ---------------------------------------------------------------- hat

/// Per-grade constants C_p with ‖T̂^k e_n‖_p ≤ C_p^k‖e_n‖_q, or `None`
/// when no route applies to the space.
pub fn hat_grade_constants(
    space: &SpaceSpec,
    theta: &Symbol,
    p_max: u32,
) -> Result<Option<(HatRoute, Vec<GradeConstant>)>> {
    let route = match space.space_type {
        SpaceType::Finite if space.alpha.is_linear() => HatRoute::FiniteLinear,
        SpaceType::Finite => HatRoute::FiniteEll1,
        SpaceType::Infinite if space.alpha.is_concave() => HatRoute::InfiniteSubadditive,
        SpaceType::Infinite => return Ok(None),
    };
    let ell1 = if route == HatRoute::FiniteEll1 {
        Some(ell1_norm_in(space, theta)?.upper())
    } else {
        None
    };
    let mut grades = Vec::with_capacity(p_max as usize);
    for p in 1..=p_max {
        let q = if route == HatRoute::FiniteLinear {
            2 * p
        } else {
            p
        };
        let norm_q = symbol_seminorm(space, theta, q)?.upper();
        let c = match route {
            HatRoute::FiniteLinear => (1.0 / (2.0 * p as f64)).exp() * norm_q,
            HatRoute::FiniteEll1 => ell1.unwrap(),
            HatRoute::InfiniteSubadditive => norm_q,
        };
        grades.push(GradeConstant { p, q, c, norm_q });
    }
    Ok(Some((route, grades)))
}

fn hat_bound_certificate(route: HatRoute) -> &'static str {
    match route {
        HatRoute::FiniteLinear => {
            "‖T̂^k e_n‖_p ≤ C_p^k·‖e_n‖_{2p}, C_p = Σ|θ_i|e^{−i/(2p)} = e^{1/(2p)}‖θ‖_{2p}"
        }
        HatRoute::FiniteEll1 => "‖T̂^k e_n‖_p ≤ (Σ|θ_i|)^k·‖e_n‖_p",
        HatRoute::InfiniteSubadditive => "‖T̂^k e_n‖_p ≤ ‖θ‖_p^k·‖e_n‖_p (α subadditive)",
    }
}

/// m-topologizability of T̂_θ from the per-grade constants.
pub fn classify_hat_m_top(space: &SpaceSpec, theta: &Symbol, grid: &GridParams) -> Result<Verdict> {
    grid.validate()?;
    let mut ev = Evidence::new(grid);
    let Some((route, grades)) = hat_grade_constants(space, theta, grid.p)? else {
        return Ok(Verdict::inconclusive(
            Property::MTopologizable,
            "no grade-preserving bound for non-concave α on infinite type".into(),
            ev,
        ));
    };
    if let Some(g) = grades.iter().find(|g| !g.c.is_finite()) {
        return Ok(Verdict::inconclusive(
            Property::MTopologizable,
            format!("C_p diverges at p = {}", g.p),
            ev,
        ));
    }
    for g in &grades {
        ev.rows.push(EvidenceRow::new("c_p", g.c).p(g.p).q(g.q));
    }
    let cert = format!(
        "{}; C_1 = {:.6e}",
        hat_bound_certificate(route),
        grades[0].c
    );
    let j = Justification::HatBound {
        space: space.clone(),
        symbol: theta.clone(),
        route,
        grades,
    };
    Ok(Verdict::holds(Property::MTopologizable, cert, j, ev))
}

/// Power boundedness of T̂_θ on Λ₁(α): equivalent to Σ|θ_i| ≤ 1.
pub fn classify_hat_power_bounded_finite(
    space: &SpaceSpec,
    theta: &Symbol,
    grid: &GridParams,
) -> Result<Verdict> {
    grid.validate()?;
    if !space.is_finite_type() {
        return Err(Error::UnsupportedSpace(
            "power boundedness via ℓ¹ needs a finite-type space".into(),
        ));
    }
    let pb = Property::PowerBounded;
    let mut ev = Evidence::new(grid);
    let ell1 = match ell1_norm_in(space, theta) {
        Ok(e) => e,
        Err(Error::TailUnbounded) => {
            return Ok(Verdict::inconclusive(
                pb,
                "ℓ¹ tail of θ is not certified".into(),
                ev,
            ));
        }
        Err(e) => return Err(e),
    };
    ev.rows.push(EvidenceRow::new("ell1_upper", ell1.upper()));
    let fails = |terms: usize, partial: f64, exact: Option<Rational>, ev: Evidence| {
        let cert = match &exact {
            Some(q) => format!("Σ_{{i<{terms}}}|θ_i| = {} > 1", format_rational(q)),
            None => format!("Σ_{{i<{terms}}}|θ_i| = {partial:.12} > 1"),
        };
        let j = Justification::Ell1PartialExceeds {
            symbol: theta.clone(),
            terms,
            partial,
            exact: exact.as_ref().and_then(exact_string),
        };
        Verdict::fails(
            pb,
            cert,
            j,
            Witness {
                n: Some(1),
                p: Some(1),
                ..Witness::default()
            },
            ev,
        )
    };
    if let Some(q) = &ell1.exact {
        if *q <= Rational::one() {
            let cert = format!("ℓ¹={}≤1", ell1_certificate(&ell1));
            let j = Justification::Ell1AtMost {
                symbol: theta.clone(),
                upper: ell1.upper(),
                exact: exact_string(q),
            };
            return Ok(Verdict::holds(pb, cert, j, ev));
        }
    } else if !ell1.divergent && ell1.upper() <= 1.0 - grid.tol {
        let cert = format!("ℓ¹≤{}≤1", ell1_certificate(&ell1));
        let j = Justification::Ell1AtMost {
            symbol: theta.clone(),
            upper: ell1.upper(),
            exact: None,
        };
        return Ok(Verdict::holds(pb, cert, j, ev));
    }
    if let Some((terms, partial, exact)) = partial_sum_exceeding(theta, grid.tol)? {
        return Ok(fails(terms, partial, exact, ev));
    }
    let binding = if ell1.divergent {
        "ℓ¹ diverges but no partial sum within the scan limit exceeds 1".to_string()
    } else {
        format!(
            "ℓ¹ ∈ [{:.12}, {:.12}] is within tol of 1",
            ell1.partial,
            ell1.upper()
        )
    };
    Ok(Verdict::inconclusive(pb, binding, ev))
}

/// Float powers θ^{*k}, k = 1..=K, truncated to n entries.
fn float_powers(s: &Symbol, k_max: usize, n: usize) -> Vec<Vec<f64>> {
    let mut base = s.prefix(n).to_f64_vec();
    base.resize(n, 0.0);
    let mut out = Vec::with_capacity(k_max);
    let mut cur = base.clone();
    out.push(cur.clone());
    for _ in 1..k_max {
        cur = convolve_slices(&cur, &base, n);
        out.push(cur.clone());
    }
    out
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Smallest k ≥ 1 with ln_base + k·ln_g > ln_target.
fn first_exceeding_k(ln_base: f64, ln_g: f64, ln_target: f64) -> usize {
    let k = ((ln_target - ln_base) / ln_g).floor() + 1.0;
    if k.is_finite() && k >= 1.0 {
        k.min(usize::MAX as f64) as usize
    } else {
        1
    }
}

/// Lowest index with a nonzero coefficient, within the scan limit.
fn lowest_nonzero(s: &Symbol, from: usize) -> Result<Option<usize>> {
    let limit = match s {
        Symbol::Finite(c) => c.support_len(),
        _ => s.readable_len().unwrap_or(SCAN_LIMIT).min(SCAN_LIMIT),
    };
    for i in from..limit {
        if !s.coeff(i)?.is_zero() {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// |c| compared with 1, exactly when possible.
fn cmp_abs_one(c: &Scalar, tol: f64) -> Option<Ordering> {
    match c {
        Scalar::Exact(q) => Some(q.abs().cmp(&Rational::one())),
        Scalar::Float(v) => {
            let a = v.abs();
            if a > 1.0 + tol {
                Some(Ordering::Greater)
            } else if a < 1.0 - tol {
                Some(Ordering::Less)
            } else {
                None
            }
        }
    }
}

/// Power boundedness of T̂_θ on Λ∞(α).
pub fn classify_hat_power_bounded_infinite(
    space: &SpaceSpec,
    theta: &Symbol,
    grid: &GridParams,
    exec: Exec,
) -> Result<Verdict> {
    grid.validate()?;
    if space.is_finite_type() {
        return Err(Error::UnsupportedSpace(
            "expected an infinite-type space".into(),
        ));
    }
    let pb = Property::PowerBounded;
    let ev = Evidence::new(grid);
    let alpha1 = space.alpha.alpha(1);
    let q_max = grid.q as f64;

    if theta.is_zero() {
        let j = Justification::ScalarPower {
            space: space.clone(),
            c: Scalar::zero(),
        };
        return Ok(Verdict::holds(pb, "θ = 0".into(), j, ev));
    }
    if theta.support_len() == Some(1) {
        let c = theta.coeff(0)?;
        match cmp_abs_one(&c, grid.tol) {
            Some(Ordering::Less | Ordering::Equal) => {
                let cert = format!("‖θ^{{*k}}‖_p = |{c}|^k·e^{{pα₁}} ≤ ‖e₁‖_p");
                let j = Justification::ScalarPower {
                    space: space.clone(),
                    c,
                };
                return Ok(Verdict::holds(pb, cert, j, ev));
            }
            Some(Ordering::Greater) => {}
            None => {
                return Ok(Verdict::inconclusive(
                    pb,
                    format!("|θ₀| = {c} within tol of 1"),
                    ev,
                ))
            }
        }
    }

    // |Σθ| > 1 forces ‖θ^{*k}‖_p ≥ e^{pα₁}|Σθ|^k.
    let sum_gt_one = match exact_sum(theta) {
        Some(s) => (s.abs() > Rational::one()).then(|| ln_abs_rat(&s)),
        None => {
            let e = ell1_norm_in(space, theta).ok();
            match e {
                Some(e) if !e.divergent => {
                    let n = theta.readable_len().unwrap_or(SCAN_LIMIT).min(SCAN_LIMIT);
                    let partial: f64 = theta.prefix(n).to_f64_vec().iter().sum();
                    let rest = (e.upper()
                        - theta
                            .prefix(n)
                            .to_f64_vec()
                            .iter()
                            .map(|v| v.abs())
                            .sum::<f64>())
                    .max(0.0);
                    let lower = partial.abs() - rest;
                    (lower > 1.0 + grid.tol).then(|| lower.ln())
                }
                _ => None,
            }
        }
    };
    if let Some(ln_g) = sum_gt_one {
        let k = first_exceeding_k(alpha1, ln_g, q_max * alpha1);
        let cert = format!(
            "|Σθ| = {:.6} > 1, ‖θ^{{*k}}‖_p ≥ e^{{pα₁}}|Σθ|^k",
            ln_g.exp()
        );
        let j = Justification::PowerGrowth {
            space: space.clone(),
            symbol: theta.clone(),
            rule: GrowthRule::SumExceedsOne,
            p: 1,
            g: ln_g.exp(),
            k,
        };
        let w = Witness {
            k: Some(k),
            n: Some(1),
            p: Some(1),
            q: Some(grid.q),
        };
        return Ok(Verdict::fails(pb, cert, j, w, ev));
    }

    if let Some(d0) = lowest_nonzero(theta, 0)? {
        let c = theta.coeff(d0)?;
        if cmp_abs_one(&c, grid.tol) == Some(Ordering::Greater) {
            let ln_g = c.ln_abs();
            let k = first_exceeding_k(alpha1, ln_g, q_max * alpha1);
            let cert = format!(
                "lowest coefficient |θ_{d0}| = {c} > 1 gives (θ^{{*k}})_{{k·{d0}}} = θ_{d0}^k"
            );
            let j = Justification::PowerGrowth {
                space: space.clone(),
                symbol: theta.clone(),
                rule: GrowthRule::LowestCoefficient { index: d0 },
                p: 1,
                g: ln_g.exp(),
                k,
            };
            let w = Witness {
                k: Some(k),
                n: Some(1),
                p: Some(1),
                q: Some(grid.q),
            };
            return Ok(Verdict::fails(pb, cert, j, w, ev));
        }
    }

    if space.alpha.is_linear() {
        if let Symbol::Finite(c) = theta {
            let len = c.support_len();
            if len >= 2 {
                let d = len - 1;
                let top = c.get(d);
                let ln_top = top.ln_abs();
                let p = ((-ln_top / d as f64).floor() + 1.0).max(1.0) as u32;
                let ln_g = ln_top + (p as f64) * d as f64;
                let k = first_exceeding_k(p as f64, ln_g, q_max);
                let cert = format!(
                    "degree {d} with |θ_{d}|e^{{pd}} = {:.6} > 1 at p = {p}: ‖θ^{{*k}}‖_p ≥ e^p·(|θ_d|e^{{pd}})^k",
                    ln_g.exp()
                );
                let j = Justification::PowerGrowth {
                    space: space.clone(),
                    symbol: theta.clone(),
                    rule: GrowthRule::TopCoefficient { index: d },
                    p,
                    g: ln_g.exp(),
                    k,
                };
                let w = Witness {
                    k: Some(k),
                    n: Some(1),
                    p: Some(p),
                    q: Some(grid.q),
                };
                return Ok(Verdict::fails(pb, cert, j, w, ev));
            }
        }
    }

    let ev = hat_growth_evidence(space, theta, grid, exec, ev);
    Ok(Verdict::inconclusive(
        pb,
        "sup_k ‖θ^{*k}‖_p against ‖e₁‖_q has no certificate".into(),
        ev,
    ))
}

/// s_p = max_k ln‖θ^{*k}‖_p and the median growth ratio over the top half of k.
fn hat_growth_evidence(
    space: &SpaceSpec,
    theta: &Symbol,
    grid: &GridParams,
    exec: Exec,
    mut ev: Evidence,
) -> Evidence {
    let powers = float_powers(theta, grid.k, grid.n);
    let grades: Vec<u32> = (1..=grid.p).collect();
    let per_p = exec.map_slice(&grades, |&p| {
        let s = space.grade_exponent(p as f64);
        let lns: Vec<f64> = powers
            .iter()
            .map(|v| ln_weighted_sum(&space.alpha, &Coeffs::Float(v.clone()), s, 0))
            .collect();
        let s_p = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let half = lns.len() / 2;
        let mut ratios: Vec<f64> = lns
            .windows(2)
            .skip(half.saturating_sub(1))
            .map(|w| (w[1] - w[0]).exp())
            .collect();
        (p, s_p, median(&mut ratios))
    });
    for (p, s_p, r_p) in per_p {
        ev.rows.push(EvidenceRow::new("ln_s_p", s_p).p(p));
        ev.rows.push(EvidenceRow::new("r_p", r_p).p(p));
    }
    ev.notes
        .push(format!("powers truncated to {} coefficients", grid.n));
    ev
}

// ---------------------------------------------------------------- check

/// t and M(t) = Σ|β_i|t^i for the Cauchy majorant at grade q, as (ln t, M, exact M).
fn cauchy_majorant(
    space: &SpaceSpec,
    beta: &Symbol,
    q: u32,
) -> Result<Option<(f64, f64, Option<Rational>)>> {
    let qf = q as f64;
    let exact_scalar = match beta {
        Symbol::Finite(Coeffs::Exact(v)) if beta.support_len().unwrap_or(0) <= 1 => {
            Some(v.first().map(|c| c.abs()).unwrap_or_else(Rational::zero))
        }
        _ => None,
    };
    if space.alpha.is_linear() {
        let ln_t = match space.space_type {
            SpaceType::Infinite => -qf,
            SpaceType::Finite => 1.0 / qf,
        };
        if let Some(m) = exact_scalar {
            return Ok(Some((ln_t, rat_to_f64(&m), Some(m))));
        }
        // Σ|β_i|e^{ln_t·(i+1)}·e^{−ln_t}
        return Ok(match symbol_seminorm_exponent(space, beta, ln_t)? {
            SymbolNorm::Bounded(b) => Some((ln_t, (b.ln_upper() - ln_t).exp(), None)),
            SymbolNorm::Divergent => None,
        });
    }
    if space.space_type == SpaceType::Infinite {
        if let Some(m) = exact_scalar {
            return Ok(Some((0.0, rat_to_f64(&m), Some(m))));
        }
        let e = match ell1_norm_in(space, beta) {
            Ok(e) => e,
            Err(Error::TailUnbounded) => return Ok(None),
            Err(e) => return Err(e),
        };
        if e.divergent {
            return Ok(None);
        }
        return Ok(Some((0.0, e.upper(), e.exact)));
    }
    Ok(None)
}

/// ln of the target envelope w_q(n): e^{qα_n} or e^{−α_n/q}.
pub fn ln_check_target(space: &SpaceSpec, n: usize, q: u32) -> f64 {
    ln_basis_norm(space, n, q as f64)
}

fn check_fail_rules(
    space: &SpaceSpec,
    beta: &Symbol,
    grid: &GridParams,
) -> Result<Option<Verdict>> {
    let pb = Property::PowerBounded;
    let ev = Evidence::new(grid);
    let b0 = beta.coeff(0)?;
    let finite_type = space.is_finite_type();
    match cmp_abs_one(&b0, grid.tol) {
        Some(Ordering::Greater) => {
            let ln_g = b0.ln_abs();
            let ln_target = ln_check_target(space, 1, grid.q);
            let k = first_exceeding_k(0.0, ln_g, ln_target.max(0.0));
            let cert = format!("|β₀| = {b0} > 1: |β^{{*k}}_0| = |β₀|^k exceeds every e^{{qα₁}}");
            let j = Justification::CoefficientWitness {
                space: space.clone(),
                symbol: beta.clone(),
                rule: CoefficientRule::LeadingAboveOne,
            };
            let w = Witness {
                k: Some(k),
                n: Some(1),
                p: None,
                q: Some(grid.q),
            };
            return Ok(Some(Verdict::fails(pb, cert, j, w, ev)));
        }
        Some(Ordering::Equal) if b0.is_exact() => {
            if let Some(d) = lowest_nonzero(beta, 1)? {
                let bd = beta.coeff(d)?;
                let cert = format!(
                    "|β₀| = 1 and β_{d} = {bd} ≠ 0: |β^{{*k}}_{d}| = k·|β_{d}| is unbounded in k"
                );
                let j = Justification::CoefficientWitness {
                    space: space.clone(),
                    symbol: beta.clone(),
                    rule: CoefficientRule::LeadingUnitWithTail { index: d },
                };
                let w = Witness {
                    k: None,
                    n: Some(d + 1),
                    p: None,
                    q: Some(grid.q),
                };
                return Ok(Some(Verdict::fails(pb, cert, j, w, ev)));
            }
        }
        _ => {}
    }
    if finite_type {
        let limit = match beta {
            Symbol::Finite(c) => c.support_len(),
            _ => beta.readable_len().unwrap_or(grid.n).min(grid.n.max(1)),
        };
        for i in 0..limit {
            if space.alpha.alpha(i + 1) <= 0.0 {
                continue;
            }
            let c = beta.coeff(i)?;
            let at_least_one = match &c {
                Scalar::Exact(q) => q.abs() >= Rational::one(),
                Scalar::Float(v) => v.abs() >= 1.0 + grid.tol,
            };
            if at_least_one {
                let cert = format!("|β_{i}| = {c} ≥ 1 > e^{{−α_{}/q}} for every q", i + 1);
                let j = Justification::CoefficientWitness {
                    space: space.clone(),
                    symbol: beta.clone(),
                    rule: CoefficientRule::CoefficientAtLeastOne { index: i },
                };
                let w = Witness {
                    k: Some(1),
                    n: Some(i + 1),
                    p: None,
                    q: Some(grid.q),
                };
                return Ok(Some(Verdict::fails(pb, cert, j, w, ev)));
            }
        }
    }
    Ok(None)
}

/// L_{k,q} = sup_{n≤N}|β^{*k}_{n−1}|/w_q(n), with a least-squares slope for ln D_q.
fn check_evidence(
    space: &SpaceSpec,
    beta: &Symbol,
    grid: &GridParams,
    exec: Exec,
    mut ev: Evidence,
) -> Evidence {
    let powers = float_powers(beta, grid.k, grid.n);
    let mut qs: Vec<u32> = std::iter::successors(Some(1u32), |q| q.checked_mul(2))
        .take_while(|q| *q < grid.q)
        .collect();
    qs.push(grid.q);
    let fits = exec.map_slice(&qs, |&q| {
        let ln_l: Vec<f64> = powers
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(m, c)| c.abs().ln() - ln_check_target(space, m + 1, q))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let pts: Vec<(f64, f64)> = ln_l
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_finite())
            .map(|(i, l)| ((i + 1) as f64, *l))
            .collect();
        let slope = if pts.len() >= 2 {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        } else {
            f64::NEG_INFINITY
        };
        (q, slope, ln_l)
    });
    let best = fits
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
        .map(|f| f.0);
    for (q, slope, ln_l) in &fits {
        ev.rows.push(EvidenceRow::new("ln_d_fit", *slope).q(*q));
        ev.rows.push(
            EvidenceRow::new(
                "max_ln_l",
                ln_l.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
            .q(*q),
        );
        if Some(*q) == best {
            for (i, l) in ln_l.iter().enumerate() {
                ev.rows.push(EvidenceRow::new("ln_l", *l).k(i + 1).q(*q));
            }
        }
    }
    ev.notes
        .push(format!("powers truncated to {} coefficients", grid.n));
    ev
}

fn check_mode(mode: Property) -> Result<()> {
    match mode {
        Property::Topologizable | Property::MTopologizable | Property::PowerBounded => Ok(()),
        _ => Err(Error::InvalidArgument(format!(
            "{} is not a dual-convolution mode",
            mode.name()
        ))),
    }
}

/// Ť_β on Λ∞(α).
pub fn classify_check_infinite(
    space: &SpaceSpec,
    beta: &Symbol,
    mode: Property,
    grid: &GridParams,
    exec: Exec,
) -> Result<Verdict> {
    if space.is_finite_type() {
        return Err(Error::UnsupportedSpace(
            "expected an infinite-type space".into(),
        ));
    }
    classify_check(space, beta, mode, grid, exec)
}

/// Ť_β on Λ₁(α).
pub fn classify_check_finite(
    space: &SpaceSpec,
    beta: &Symbol,
    mode: Property,
    grid: &GridParams,
    exec: Exec,
) -> Result<Verdict> {
    if !space.is_finite_type() {
        return Err(Error::UnsupportedSpace(
            "expected a finite-type space".into(),
        ));
    }
    classify_check(space, beta, mode, grid, exec)
}

/// Ť_β on either type; `mode` is topologizable, m-topologizable or power bounded.
pub fn classify_check(
    space: &SpaceSpec,
    beta: &Symbol,
    mode: Property,
    grid: &GridParams,
    exec: Exec,
) -> Result<Verdict> {
    grid.validate()?;
    check_mode(mode)?;
    let ev = Evidence::new(grid);
    let pb = mode == Property::PowerBounded;
    if pb {
        if let Some(v) = check_fail_rules(space, beta, grid)? {
            return Ok(v);
        }
    }
    let finite_type = space.is_finite_type();
    if space.alpha.is_linear() || !finite_type {
        for q in 1..=grid.q {
            let Some((ln_t, m, exact)) = cauchy_majorant(space, beta, q)? else {
                continue;
            };
            // Linear Λ₁ pays e^{1/q} from the shift m = n − 1.
            let shift = if finite_type && space.alpha.is_linear() {
                1.0 / q as f64
            } else {
                0.0
            };
            if pb {
                let ok = match &exact {
                    Some(mq) if shift == 0.0 => *mq <= Rational::one(),
                    Some(mq) if mq.is_zero() => true,
                    _ => m * shift.exp() <= 1.0 - grid.tol,
                };
                if !ok {
                    continue;
                }
                let cert =
                    format!("M(t) = Σ|β_i|t^i = {m:.6e}, |β^{{*k}}_{{n−1}}| ≤ w_q(n) with q = {q}");
                let j = Justification::CauchyMajorant {
                    space: space.clone(),
                    symbol: beta.clone(),
                    target: mode,
                    q,
                    ln_t,
                    majorant: m,
                    exact: exact.as_ref().and_then(exact_string),
                    d: 1.0,
                };
                return Ok(Verdict::holds(mode, cert, j, ev));
            }
            let d = m.max(1.0) * shift.exp();
            let cert = format!("|β^{{*k}}_{{n−1}}| ≤ D^k·w_q(n) with q = {q}, D = {d:.6e}");
            let j = Justification::CauchyMajorant {
                space: space.clone(),
                symbol: beta.clone(),
                target: mode,
                q,
                ln_t,
                majorant: m,
                exact: exact.as_ref().and_then(exact_string),
                d,
            };
            return Ok(Verdict::holds(mode, cert, j, ev));
        }
    } else if let (Symbol::Finite(_), Some(lip)) = (beta, space.alpha.lipschitz()) {
        let support = beta.support_len().unwrap_or(0);
        let ell1 = ell1_norm_in(space, beta)?.upper();
        let span = space.alpha.alpha(1) + lip * support.saturating_sub(1) as f64;
        let q = if pb {
            if !(ell1 < 1.0) {
                None
            } else if ell1 == 0.0 || span <= 0.0 {
                Some(1)
            } else {
                let need = (span / -ell1.ln()).ceil().max(1.0);
                (need <= grid.q as f64).then_some(need as u32)
            }
        } else {
            Some(1)
        };
        if let Some(q) = q {
            let d = if pb {
                1.0
            } else {
                ell1.max(1.0) * (span / q as f64).exp()
            };
            let cert = format!(
                "support {support}, ℓ¹ = {ell1:.6e}: |β^{{*k}}_{{n−1}}| ≤ ℓ¹^k ≤ D^k·e^{{−α_n/q}} with q = {q}"
            );
            let j = Justification::FiniteSupportBound {
                space: space.clone(),
                symbol: beta.clone(),
                target: mode,
                q,
                support,
                lip,
                ell1,
                d,
            };
            return Ok(Verdict::holds(mode, cert, j, ev));
        }
    }
    let ev = check_evidence(space, beta, grid, exec, ev);
    let binding = match mode {
        Property::PowerBounded => "no grade q ≤ Q certifies sup_k |β^{*k}_{n−1}|/w_q(n) ≤ 1",
        _ => "no grade q ≤ Q gives a finite certified majorant",
    };
    Ok(Verdict::inconclusive(mode, binding.into(), ev))
}

// ---------------------------------------------------------------- strong tameness

/// Closed-form strong-tameness bound for T at grade p, if one applies.
pub fn tame_bound(op: &OperatorSpec, p: u32) -> Result<Option<f64>> {
    let space = &op.space;
    let hat = |theta: &Symbol| -> Result<Option<f64>> {
        Ok(match hat_grade_constants(space, theta, p)? {
            Some((HatRoute::FiniteLinear, g)) => Some(g[p as usize - 1].c),
            Some((HatRoute::FiniteEll1, g)) => Some(g[p as usize - 1].c),
            Some((HatRoute::InfiniteSubadditive, g)) => Some(g[p as usize - 1].c),
            None => None,
        })
    };
    let check = |beta: &Symbol| -> Result<Option<f64>> {
        match space.space_type {
            SpaceType::Infinite => Ok(Some(ell1_norm_in(space, beta)?.upper())),
            SpaceType::Finite if space.alpha.is_concave() => {
                Ok(Some(symbol_seminorm_exponent(space, beta, 1.0)?.upper()))
            }
            SpaceType::Finite => Ok(None),
        }
    };
    match &op.kind {
        OperatorKind::Hat { theta } => hat(theta),
        OperatorKind::Check { beta } => check(beta),
        OperatorKind::Toeplitz { theta, beta } => Ok(match (hat(theta)?, check(beta)?) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        }),
    }
}

/// ln max_{n≤N} ‖Te_n‖_p/‖e_n‖_p.
pub fn ln_tame_constant(op: &OperatorSpec, p: u32, n_max: usize, exec: Exec) -> Result<f64> {
    let space = &op.space;
    let vals = exec.map(n_max, |i| -> Result<f64> {
        let n = i + 1;
        let col = op.column(n, n + crate::symbols::DEFAULT_TRUNCATION)?;
        Ok(space.seminorm(&col, p)?.ln_upper() - ln_basis_norm(space, n, p as f64))
    });
    let mut best = f64::NEG_INFINITY;
    for v in vals {
        best = best.max(v?);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TameReport {
    pub rows: Vec<TameRow>,
    pub verdict: Verdict,
}

/// Grade constants Ĉ_p against the closed-form bounds.
pub fn strongly_tame_probe(op: &OperatorSpec, grid: &GridParams, exec: Exec) -> Result<TameReport> {
    grid.validate()?;
    let mut rows = Vec::with_capacity(grid.p as usize);
    for p in 1..=grid.p {
        let c_hat = ln_tame_constant(op, p, grid.n, exec)?.exp();
        rows.push(TameRow {
            p,
            c_hat,
            bound: tame_bound(op, p)?,
        });
    }
    let mut ev = Evidence::new(grid);
    for r in &rows {
        ev.rows.push(EvidenceRow::new("c_hat", r.c_hat).p(r.p));
        if let Some(b) = r.bound {
            ev.rows.push(EvidenceRow::new("bound", b).p(r.p));
        }
    }
    let st = Property::StronglyTame;
    let verdict = if let Some(r) = rows.iter().find(|r| !r.bound.is_some_and(f64::is_finite)) {
        Verdict::inconclusive(
            st,
            format!("no finite closed-form bound at p = {}", r.p),
            ev,
        )
    } else if let Some(r) = rows
        .iter()
        .find(|r| r.c_hat > r.bound.unwrap() * (1.0 + BOUND_MARGIN))
    {
        ev.notes.push(format!(
            "grid constant exceeds the closed-form bound at p = {}",
            r.p
        ));
        Verdict::inconclusive(st, format!("Ĉ_{} = {:.6e} above bound", r.p, r.c_hat), ev)
    } else {
        let cert = format!(
            "‖Te_n‖_p ≤ C_p‖e_n‖_p with C_1 = {:.6e}",
            rows[0].bound.unwrap()
        );
        Verdict::holds(
            st,
            cert,
            Justification::StrongTame {
                op: op.clone(),
                rows: rows.clone(),
            },
            ev,
        )
    };
    Ok(TameReport { rows, verdict })
}

// ---------------------------------------------------------------- toeplitz

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToeplitzVerdicts {
    pub topologizable: Verdict,
    pub m_top: Verdict,
    pub power_bounded: Verdict,
}

/// Sufficient conditions for T_{θ,β} on Λ₁(n) and Λ∞(n).
pub fn classify_toeplitz(
    space: &SpaceSpec,
    theta: &Symbol,
    beta: &Symbol,
    grid: &GridParams,
) -> Result<ToeplitzVerdicts> {
    grid.validate()?;
    if !space.alpha.is_linear() {
        return Err(Error::UnsupportedSpace(format!(
            "Toeplitz sufficient conditions need α = n, got {}",
            space.describe()
        )));
    }
    let ev = Evidence::new(grid);
    let (kind, beta_sum, beta_exact) = match space.space_type {
        SpaceType::Infinite => {
            let e = match ell1_norm_in(space, beta) {
                Ok(e) => e,
                Err(Error::TailUnbounded) => Ell1 {
                    partial: f64::INFINITY,
                    tail: 0.0,
                    divergent: true,
                    exact: None,
                },
                Err(e) => return Err(e),
            };
            (SumKind::A, e.upper(), e.exact)
        }
        SpaceType::Finite => {
            let b = symbol_seminorm_exponent(space, beta, 1.0)?.upper();
            (SumKind::B, b, beta.is_zero().then(Rational::zero))
        }
    };
    let sum_name = match kind {
        SumKind::A => "A = Σ|β_i|",
        SumKind::B => "B = Σ|β_i|e^{i+1}",
    };
    // sup_p of the hat constant: ℓ¹(θ) on Λ₁(n); on Λ∞(n) finite only for θ = 0.
    let (theta_sup, theta_exact) = match space.space_type {
        SpaceType::Finite => {
            let e = ell1_norm_in(space, theta)?;
            (e.upper(), e.exact)
        }
        SpaceType::Infinite => {
            if theta.is_zero() {
                (0.0, Some(Rational::zero()))
            } else {
                (f64::INFINITY, None)
            }
        }
    };
    let just =
        |target: Property, total: f64, exact: Option<Rational>| Justification::SufficientSum {
            space: space.clone(),
            theta: theta.clone(),
            beta: beta.clone(),
            kind,
            target,
            beta_sum,
            theta_sup,
            total,
            exact: exact.as_ref().and_then(exact_string),
        };
    let m_top = if beta_sum.is_finite() {
        let cert = format!("{sum_name} = {beta_sum:.12} < ∞: strongly tame, hence m-topologizable");
        Verdict::holds(
            Property::MTopologizable,
            cert,
            just(Property::MTopologizable, beta_sum, beta_exact.clone()),
            ev.clone(),
        )
    } else {
        Verdict::inconclusive(
            Property::MTopologizable,
            format!("{sum_name} diverges"),
            ev.clone(),
        )
    };
    let total = theta_sup + beta_sum;
    let total_exact = match (&theta_exact, &beta_exact) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    let pb_ok = match &total_exact {
        Some(t) => *t <= Rational::one(),
        None => total <= 1.0 - grid.tol,
    };
    let power_bounded = if pb_ok {
        let cert = format!("sup_p C_p(θ) + {sum_name} = {total:.12} ≤ 1");
        Verdict::holds(
            Property::PowerBounded,
            cert,
            just(Property::PowerBounded, total, total_exact),
            ev.clone(),
        )
    } else {
        Verdict::inconclusive(
            Property::PowerBounded,
            format!("sup_p C_p(θ) + {sum_name} = {total:.6e} is not ≤ 1"),
            ev.clone(),
        )
    };
    let topologizable = if m_top.status == Status::Holds {
        Verdict::implied(&m_top, Property::Topologizable)
    } else {
        Verdict::inconclusive(Property::Topologizable, format!("{sum_name} diverges"), ev)
    };
    let m_top = if m_top.status != Status::Holds && power_bounded.status == Status::Holds {
        Verdict::implied(&power_bounded, Property::MTopologizable)
    } else {
        m_top
    };
    Ok(ToeplitzVerdicts {
        topologizable,
        m_top,
        power_bounded,
    })
}

// ---------------------------------------------------------------- mean ergodicity

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CesaroBoundRow {
    pub p: u32,
    /// Smallest q ≤ Q with max_{n,k}‖T^{[k]}e_n‖_p/‖e_n‖_q ≤ 1, if any.
    pub q: Option<u32>,
    /// The maximal ratio at that q (at Q when none qualifies).
    #[serde(with = "ext_f64")]
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub k: usize,
    pub p: u32,
    /// ‖T^k x‖_p / k
    #[serde(with = "ext_f64")]
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffRow {
    pub k: usize,
    pub p: u32,
    /// ‖T^{[k]}x − T^{[k−1]}x‖_p
    #[serde(with = "ext_f64")]
    pub value: f64,
}

/// Evidence about mean ergodicity; no status is decided.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicReport {
    pub grid: GridParams,
    /// Basis vectors used for the Cesàro-bound ratios.
    pub basis: usize,
    pub cesaro_bound: Vec<CesaroBoundRow>,
    pub trend: Vec<TrendRow>,
    /// P̂x = T^{[K]}x.
    pub limit: Element,
    pub differences: Vec<DiffRow>,
    pub triangle_ok: bool,
}

/// Basis vectors probed by [`mean_ergodic_probe`].
pub const ERGODIC_BASIS: usize = 8;

pub fn mean_ergodic_probe(
    op: &OperatorSpec,
    x: &Element,
    grid: &GridParams,
    exec: Exec,
) -> Result<ErgodicReport> {
    grid.validate()?;
    let space = &op.space;
    let grades: Vec<u32> = (1..=grid.p).collect();
    let basis = grid.n.min(ERGODIC_BASIS);

    // max_k ln‖T^{[k]}e_n‖_p for each (n, p).
    let per_n = exec.map(basis, |i| -> Result<Vec<f64>> {
        let rec = orbit(op, &Element::basis(i + 1), grid.k, &grades)?;
        Ok(grades
            .iter()
            .map(|&p| {
                rec.rows
                    .iter()
                    .filter(|r| r.p == p)
                    .map(|r| r.cesaro.ln_upper())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect())
    });
    let per_n: Vec<Vec<f64>> = per_n.into_iter().collect::<Result<_>>()?;
    let mut cesaro_bound = Vec::with_capacity(grades.len());
    for (gi, &p) in grades.iter().enumerate() {
        let ratio_at = |q: u32| {
            per_n
                .iter()
                .enumerate()
                .map(|(i, v)| v[gi] - ln_basis_norm(space, i + 1, q as f64))
                .fold(f64::NEG_INFINITY, f64::max)
                .exp()
        };
        let found = (1..=grid.q).find(|&q| ratio_at(q) <= 1.0 + grid.tol);
        let ratio = ratio_at(found.unwrap_or(grid.q));
        cesaro_bound.push(CesaroBoundRow { p, q: found, ratio });
    }

    let rec = orbit(op, x, grid.k, &grades)?;
    let trend = rec
        .rows
        .iter()
        .map(|r| TrendRow {
            k: r.k,
            p: r.p,
            value: r.norm.upper() / r.k as f64,
        })
        .collect();

    let elems = orbit_elements(op, x, grid.k)?;
    let mut means: Vec<Element> = Vec::with_capacity(elems.len());
    let mut running: Option<Element> = None;
    for (i, e) in elems.iter().enumerate() {
        let sum = match running {
            None => e.clone(),
            Some(acc) => add_aligned(&acc, e)?,
        };
        means.push(sum.scale(&Scalar::ratio(1, (i + 1) as i64)));
        running = Some(sum);
    }
    let mut differences = Vec::new();
    for k in 2..=means.len() {
        let d = add_aligned(&means[k - 1], &means[k - 2].scale(&Scalar::int(-1)))?;
        for &p in &grades {
            differences.push(DiffRow {
                k,
                p,
                value: space.seminorm(&d, p)?.upper(),
            });
        }
    }
    Ok(ErgodicReport {
        grid: *grid,
        basis,
        cesaro_bound,
        trend,
        limit: means.pop().expect("K ≥ 1"),
        differences,
        triangle_ok: rec.triangle_ok,
    })
}

// ---------------------------------------------------------------- dispatch

fn base_verdict(
    op: &OperatorSpec,
    prop: Property,
    grid: &GridParams,
    exec: Exec,
) -> Result<Verdict> {
    let space = &op.space;
    match &op.kind {
        OperatorKind::Hat { theta } => match prop {
            Property::Topologizable => Ok(classify_hat_m_top(space, theta, grid)?.relabel(prop)),
            Property::MTopologizable => classify_hat_m_top(space, theta, grid),
            _ if space.is_finite_type() => classify_hat_power_bounded_finite(space, theta, grid),
            _ => classify_hat_power_bounded_infinite(space, theta, grid, exec),
        },
        OperatorKind::Check { beta } => classify_check(space, beta, prop, grid, exec),
        OperatorKind::Toeplitz { theta, beta } => match classify_toeplitz(space, theta, beta, grid)
        {
            Ok(t) => Ok(match prop {
                Property::Topologizable => t.topologizable,
                Property::MTopologizable => t.m_top,
                _ => t.power_bounded,
            }),
            Err(Error::UnsupportedSpace(msg)) => {
                Ok(Verdict::inconclusive(prop, msg, Evidence::new(grid)))
            }
            Err(e) => Err(e),
        },
    }
}

/// Classify `op` for each requested property, enforcing
/// power bounded ⇒ m-topologizable ⇒ topologizable on Holds (and the
/// converse chain on Fails).
pub fn classify(
    op: &OperatorSpec,
    props: &[Property],
    grid: &GridParams,
    exec: Exec,
) -> Result<Vec<Verdict>> {
    grid.validate()?;
    let mut top = base_verdict(op, Property::Topologizable, grid, exec)?;
    let mut mtop = base_verdict(op, Property::MTopologizable, grid, exec)?;
    let mut pb = base_verdict(op, Property::PowerBounded, grid, exec)?;

    if pb.status == Status::Holds && mtop.status == Status::Inconclusive {
        mtop = Verdict::implied(&pb, Property::MTopologizable);
    }
    if mtop.status == Status::Holds && top.status == Status::Inconclusive {
        top = Verdict::implied(&mtop, Property::Topologizable);
    }
    if top.status == Status::Fails && mtop.status == Status::Inconclusive {
        mtop = Verdict::implied(&top, Property::MTopologizable);
    }
    if mtop.status == Status::Fails && pb.status == Status::Inconclusive {
        pb = Verdict::implied(&mtop, Property::PowerBounded);
    }
    let contradiction =
        |a: &Verdict, b: &Verdict| a.status == Status::Holds && b.status == Status::Fails;
    if contradiction(&pb, &mtop) || contradiction(&mtop, &top) || contradiction(&pb, &top) {
        return Err(Error::HypothesisUnmet(
            "contradictory decisive verdicts across the hierarchy".into(),
        ));
    }

    let mut out = Vec::with_capacity(props.len());
    for &prop in props {
        out.push(match prop {
            Property::Topologizable => top.clone(),
            Property::MTopologizable => mtop.clone(),
            Property::PowerBounded => pb.clone(),
            Property::CesaroBounded => {
                if pb.status == Status::Holds {
                    Verdict::implied(&pb, Property::CesaroBounded)
                } else {
                    let mut ev = Evidence::new(grid);
                    let probe = mean_ergodic_probe(op, &Element::basis(1), grid, exec)?;
                    for r in &probe.cesaro_bound {
                        let mut row = EvidenceRow::new("cesaro_ratio", r.ratio).p(r.p);
                        row.q = r.q;
                        ev.rows.push(row);
                    }
                    Verdict::inconclusive(
                        prop,
                        "Cesàro boundedness is only decided through power boundedness".into(),
                        ev,
                    )
                }
            }
            Property::StronglyTame => strongly_tame_probe(op, grid, exec)?.verdict,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ExponentSequence;

    fn g() -> GridParams {
        GridParams::default()
    }

    fn geo(c: (i64, i64), r: (i64, i64)) -> Symbol {
        Symbol::geometric(Scalar::ratio(c.0, c.1), Scalar::ratio(r.0, r.1))
    }

    #[test]
    fn grid_validation() {
        assert!(g().validate().is_ok());
        assert!(GridParams { tol: 0.0, ..g() }.validate().is_err());
        assert!(GridParams { tol: 1e-5, ..g() }.validate().is_err());
        assert!(GridParams { k: 0, ..g() }.validate().is_err());
    }

    #[test]
    fn hat_m_top_examples() {
        let l1 = SpaceSpec::lambda1_linear();
        let v = classify_hat_m_top(&l1, &Symbol::from_ints(&[1, 1]), &g()).unwrap();
        assert_eq!(v.status, Status::Holds);
        let Some(Justification::HatBound { grades, .. }) = &v.justification else {
            panic!()
        };
        for gc in grades {
            let p = gc.p as f64;
            let want = (-1.0 / (2.0 * p)).exp() + (-2.0 / (2.0 * p)).exp();
            assert!((gc.norm_q - want).abs() < 1e-14);
        }
        let li = SpaceSpec::lambda_inf_linear();
        let v = classify_hat_m_top(&li, &Symbol::from_ints(&[1]), &g()).unwrap();
        let Some(Justification::HatBound { grades, .. }) = &v.justification else {
            panic!()
        };
        assert!((grades[2].c - 3f64.exp()).abs() < 1e-12);
        let v = classify_hat_m_top(&l1, &geo((1, 1), (1, 2)), &g()).unwrap();
        assert_eq!(v.status, Status::Holds);
    }

    #[test]
    fn hat_pb_finite_examples() {
        let l1 = SpaceSpec::lambda1_linear();
        let v = classify_hat_power_bounded_finite(&l1, &geo((1, 2), (1, 2)), &g()).unwrap();
        assert_eq!(v.status, Status::Holds);
        assert_eq!(v.certificate, "ℓ¹=1≤1");
        let v = classify_hat_power_bounded_finite(&l1, &Symbol::from_ints(&[1, 1]), &g()).unwrap();
        assert_eq!(v.status, Status::Fails);
        let Some(Justification::Ell1PartialExceeds { terms, .. }) = &v.justification else {
            panic!()
        };
        assert_eq!(*terms, 2);
        let v = classify_hat_power_bounded_finite(&l1, &Symbol::zero(), &g()).unwrap();
        assert_eq!(v.status, Status::Holds);
        let near = Symbol::Finite(Coeffs::Float(vec![0.5, 0.5 + 1e-12]));
        let v = classify_hat_power_bounded_finite(&l1, &near, &g()).unwrap();
        assert_eq!(v.status, Status::Inconclusive);
        assert!(v.evidence.binding.is_some());
    }

    #[test]
    fn hat_pb_infinite_examples() {
        let li = SpaceSpec::lambda_inf_linear();
        let s = Exec::Sequential;
        let v =
            classify_hat_power_bounded_infinite(&li, &Symbol::delta(Scalar::ratio(-1, 1)), &g(), s)
                .unwrap();
        assert_eq!(v.status, Status::Holds);
        let v = classify_hat_power_bounded_infinite(&li, &Symbol::delta(Scalar::int(2)), &g(), s)
            .unwrap();
        assert_eq!(v.status, Status::Fails);
        let half = Symbol::from_scalars(&[Scalar::ratio(1, 2), Scalar::ratio(1, 2)]);
        let v = classify_hat_power_bounded_infinite(&li, &half, &g(), s).unwrap();
        assert_ne!(v.status, Status::Holds);
    }

    #[test]
    fn hat_pb_infinite_without_certificate_reports_evidence() {
        let alpha = ExponentSequence::root(2).unwrap();
        let sp = SpaceSpec::new(SpaceType::Infinite, alpha);
        let theta = Symbol::from_scalars(&[Scalar::ratio(1, 2), Scalar::ratio(1, 4)]);
        let grid = GridParams {
            n: 32,
            k: 8,
            p: 2,
            q: 4,
            tol: 1e-9,
        };
        let v = classify_hat_power_bounded_infinite(&sp, &theta, &grid, Exec::Sequential).unwrap();
        assert_eq!(v.status, Status::Inconclusive);
        assert!(v.evidence.rows.iter().any(|r| r.label == "r_p"));
    }

    #[test]
    fn check_infinite_examples() {
        let li = SpaceSpec::lambda_inf_linear();
        let s = Exec::Sequential;
        for mode in [
            Property::Topologizable,
            Property::MTopologizable,
            Property::PowerBounded,
        ] {
            let v =
                classify_check(&li, &Symbol::delta(Scalar::ratio(-1, 2)), mode, &g(), s).unwrap();
            assert_eq!(v.status, Status::Holds, "{mode:?}");
        }
        let v = classify_check(
            &li,
            &Symbol::from_ints(&[0, 1]),
            Property::PowerBounded,
            &g(),
            s,
        )
        .unwrap();
        assert_eq!(v.status, Status::Holds);
        let v = classify_check(
            &li,
            &Symbol::delta(Scalar::int(3)),
            Property::PowerBounded,
            &g(),
            s,
        )
        .unwrap();
        assert_eq!(v.status, Status::Fails);
        assert!(v.witness.unwrap().k.is_some());
        let v = classify_check(
            &li,
            &Symbol::from_ints(&[1, 1]),
            Property::PowerBounded,
            &g(),
            s,
        )
        .unwrap();
        assert_eq!(v.status, Status::Fails);
    }

    #[test]
    fn check_finite_examples() {
        let l1 = SpaceSpec::lambda1_linear();
        let s = Exec::Sequential;
        let c = Symbol::Finite(Coeffs::Float(vec![(-0.5f64).exp()]));
        let v = classify_check(&l1, &c, Property::PowerBounded, &g(), s).unwrap();
        assert_eq!(v.status, Status::Holds);
        let v = classify_check(
            &l1,
            &Symbol::from_ints(&[1, 1]),
            Property::Topologizable,
            &g(),
            s,
        )
        .unwrap();
        assert_eq!(v.status, Status::Holds);
        let v = classify_check(
            &l1,
            &Symbol::from_ints(&[1]),
            Property::PowerBounded,
            &g(),
            s,
        )
        .unwrap();
        assert_eq!(v.status, Status::Fails);
    }

    #[test]
    fn check_non_linear_finite_support() {
        let sp = SpaceSpec::new(SpaceType::Finite, ExponentSequence::root(2).unwrap());
        let beta = Symbol::from_scalars(&[Scalar::ratio(1, 4), Scalar::ratio(1, 4)]);
        let v = classify_check(&sp, &beta, Property::PowerBounded, &g(), Exec::Sequential).unwrap();
        assert_eq!(v.status, Status::Holds);
        let v =
            classify_check(&sp, &beta, Property::MTopologizable, &g(), Exec::Sequential).unwrap();
        assert_eq!(v.status, Status::Holds);
    }

    #[test]
    fn strongly_tame_examples() {
        let grid = GridParams { n: 64, ..g() };
        let s = Exec::Sequential;
        let li = SpaceSpec::lambda_inf_linear();
        let op = OperatorSpec::hat(li.clone(), Symbol::from_ints(&[1, 1])).unwrap();
        let r = strongly_tame_probe(&op, &grid, s).unwrap();
        assert_eq!(r.verdict.status, Status::Holds);
        for row in &r.rows {
            let p = row.p as f64;
            assert!(
                (row.bound.unwrap() - (p.exp() + (2.0 * p).exp())).abs()
                    < 1e-9 * row.bound.unwrap()
            );
        }
        let op = OperatorSpec::check(li, geo((1, 1), (1, 2)), None).unwrap();
        let r = strongly_tame_probe(&op, &grid, s).unwrap();
        assert_eq!(r.verdict.status, Status::Holds);
        assert_eq!(r.rows[0].bound, Some(2.0));
        let l1 = SpaceSpec::lambda1_linear();
        let beta = Symbol::geometric(Scalar::one(), Scalar::Float((-2.0f64).exp()));
        let op = OperatorSpec::check(l1, beta, None).unwrap();
        let r = strongly_tame_probe(&op, &grid, s).unwrap();
        assert_eq!(r.verdict.status, Status::Holds);
        let b = 1f64.exp() / (1.0 - (-1.0f64).exp());
        assert!((r.rows[0].bound.unwrap() - b).abs() < 1e-12 * b);
    }

    #[test]
    fn toeplitz_examples() {
        let li = SpaceSpec::lambda_inf_linear();
        let t = classify_toeplitz(&li, &Symbol::zero(), &geo((1, 2), (1, 2)), &g()).unwrap();
        assert_eq!(t.power_bounded.status, Status::Holds);
        assert_eq!(t.m_top.status, Status::Holds);
        let l1 = SpaceSpec::lambda1_linear();
        let t = classify_toeplitz(
            &l1,
            &Symbol::delta(Scalar::ratio(3, 4)),
            &Symbol::zero(),
            &g(),
        )
        .unwrap();
        assert_eq!(t.power_bounded.status, Status::Holds);
        let ones = Symbol::geometric(Scalar::one(), Scalar::one());
        let t = classify_toeplitz(&li, &Symbol::zero(), &ones, &g()).unwrap();
        assert_eq!(t.m_top.status, Status::Inconclusive);
        let sp = SpaceSpec::new(SpaceType::Infinite, ExponentSequence::log());
        assert!(matches!(
            classify_toeplitz(&sp, &Symbol::zero(), &Symbol::zero(), &g()),
            Err(Error::UnsupportedSpace(_))
        ));
    }

    #[test]
    fn ergodic_examples() {
        let grid = GridParams {
            n: 4,
            k: 16,
            p: 3,
            q: 4,
            tol: 1e-9,
        };
        let s = Exec::Sequential;
        let li = SpaceSpec::lambda_inf_linear();
        let id = OperatorSpec::hat(li, Symbol::from_ints(&[1])).unwrap();
        let r = mean_ergodic_probe(&id, &Element::basis(1), &grid, s).unwrap();
        assert!(r.limit.same_values(&Element::basis(1)));
        assert!(r.differences.iter().all(|d| d.value == 0.0));
        assert!(r.triangle_ok);

        let l1 = SpaceSpec::lambda1_linear();
        let shift = OperatorSpec::hat(l1, Symbol::from_ints(&[0, 1])).unwrap();
        let r = mean_ergodic_probe(&shift, &Element::basis(1), &grid, s).unwrap();
        let want: f64 = (2..=17).map(|j| (-(j as f64) / 2.0).exp()).sum::<f64>() / 16.0;
        let got = r.limit.values().to_f64_vec();
        assert_eq!(got.len(), 17);
        let norm = SpaceSpec::lambda1_linear()
            .seminorm(&r.limit, 2)
            .unwrap()
            .value();
        assert!((norm - want).abs() < 1e-12);
    }

    #[test]
    fn hierarchy_promotes() {
        let li = SpaceSpec::lambda_inf_linear();
        let op = OperatorSpec::check(li, Symbol::from_ints(&[0, 1]), None).unwrap();
        let props = [
            Property::Topologizable,
            Property::MTopologizable,
            Property::PowerBounded,
            Property::CesaroBounded,
        ];
        let v = classify(&op, &props, &g(), Exec::Sequential).unwrap();
        assert!(v.iter().all(|v| v.status == Status::Holds));
        let t = Verdict::implied(&v[2], Property::Topologizable);
        assert!(matches!(
            t.justification,
            Some(Justification::Implied { .. })
        ));
    }

    #[test]
    fn verdict_serializes() {
        let l1 = SpaceSpec::lambda1_linear();
        let v = classify_hat_power_bounded_finite(&l1, &geo((1, 2), (1, 2)), &g()).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"status\":\"holds\""));
    }
}
