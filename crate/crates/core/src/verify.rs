//! Property suites: sweeps of the proved inequalities, exact composition
//! identities, classifier batteries and quadrature checks. Every check
//! reports its case count, failures and extremal relative slack.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify, classify_hat_power_bounded_finite, classify_toeplitz, mean_ergodic_probe, GridParams,
    Property, Status, Verdict,
};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::laurent::{
    laurent_coeffs, toeplitz_from_function, HoloSource, HoloSymbol, Intended, SplitShape,
};
use crate::num::{ext_f64, ln_add, rel_slack_ln, Coeffs, Rational, Scalar};
use crate::operators::{
    check_apply, check_column, compose_check, compose_hat, hat_apply, hat_column, orbit,
    OperatorSpec,
};
use crate::oracle::{dense_apply, element_vector, replay_verdict, DenseTrunc};
use crate::spaces::{
    fnd_constant, ln_basis_norm, nuclearity_check, ExponentSequence, SpaceSpec, SpaceType,
};
use crate::symbols::{
    ell1_norm_in, symbol_seminorm, symbol_seminorm_exponent, ConvPowerTable, Symbol, SymbolNorm,
    DEFAULT_TRUNCATION,
};

/// A check fails when some relative slack drops below −SLACK_TOL.
pub const SLACK_TOL: f64 = 1e-12;

const DEFAULT_SEED: u64 = 0x7073_6f70;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Inequalities,
    Identities,
    Classifiers,
    Laurent,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Inequalities => "inequalities",
            Suite::Identities => "identities",
            Suite::Classifiers => "classifiers",
            Suite::Laurent => "laurent",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "inequalities" => Suite::Inequalities,
            "identities" => Suite::Identities,
            "classifiers" => Suite::Classifiers,
            "laurent" => Suite::Laurent,
            "all" => Suite::All,
            other => return Err(Error::UnknownSuite(other.to_string())),
        })
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Smallest relative slack seen; `None` for exact-agreement checks.
    #[serde(with = "ext_f64::opt")]
    pub min_slack: Option<f64>,
    /// Where the smallest slack (or the first failure) occurred.
    pub worst: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} {:<28} {}/{} ok",
            self.name,
            self.cases - self.failures,
            self.cases
        );
        if let Some(m) = self.min_slack {
            let _ = write!(s, "  min slack {m:.3e}");
        }
        if let Some(w) = &self.worst {
            let _ = write!(s, "  at {w}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{}", c.line());
        }
        let _ = writeln!(
            s,
            "suite {}: {}",
            self.suite.name(),
            if self.passed { "PASS" } else { "FAIL" }
        );
        s
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    cases: usize,
    failures: usize,
    min_slack: Option<f64>,
    worst: Option<String>,
}

impl Tally {
    fn slack(&mut self, s: f64, at: impl FnOnce() -> String) {
        self.cases += 1;
        let bad = !(s >= -SLACK_TOL);
        if bad {
            self.failures += 1;
        }
        if self.min_slack.map_or(true, |m| s < m || s.is_nan()) {
            self.min_slack = Some(s);
            self.worst = Some(at());
        }
    }

    fn exact(&mut self, ok: bool, at: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.worst.is_none() {
                self.worst = Some(at());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.failures += other.failures;
        if let Some(s) = other.min_slack {
            if self.min_slack.map_or(true, |m| s < m) {
                self.min_slack = Some(s);
                self.worst = other.worst;
            }
        } else if self.worst.is_none() {
            self.worst = other.worst;
        }
    }

    fn finish(self, name: &str) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            cases: self.cases,
            failures: self.failures,
            min_slack: self.min_slack,
            worst: self.worst,
        }
    }
}

fn merge_all(parts: Vec<Result<Tally>>, name: &str) -> Result<CheckResult> {
    let mut t = Tally::default();
    for p in parts {
        t.merge(p?);
    }
    Ok(t.finish(name))
}

// ---------------------------------------------------------------- generators

/// Sweep bounds for the inequality suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n: usize,
    pub p: u32,
    pub k: usize,
    pub symbols: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 256,
            p: 8,
            k: 32,
            symbols: 50,
            seed: DEFAULT_SEED,
        }
    }
}

/// Bounds for the exact identity suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityConfig {
    pub cases: usize,
    pub n: usize,
    pub k_fold: usize,
    pub seed: u64,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            cases: 200,
            n: 64,
            k_fold: 8,
            seed: DEFAULT_SEED,
        }
    }
}

pub fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(case as u64);
    r
}

/// p/q with |p| ≤ 9, 1 ≤ q ≤ 9.
pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(
        rng.gen_range(-9i64..=9).into(),
        rng.gen_range(1i64..=9).into(),
    )
}

/// Exact finite symbol with 1 to `max_len` coefficients.
pub fn random_rational_symbol<R: Rng>(rng: &mut R, max_len: usize) -> Symbol {
    let len = rng.gen_range(1..=max_len);
    Symbol::Finite(Coeffs::Exact(
        (0..len).map(|_| random_rational(rng)).collect(),
    ))
}

fn random_float_finite<R: Rng>(rng: &mut R, max_len: usize) -> Symbol {
    let len = rng.gen_range(1..=max_len);
    Symbol::Finite(Coeffs::Float(
        (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
    ))
}

/// A member of the space: finite lists, plus geometric symbols on Λ₁.
pub fn random_member<R: Rng>(rng: &mut R, space_type: SpaceType) -> Symbol {
    if space_type == SpaceType::Finite && rng.gen_bool(0.5) {
        Symbol::geometric(
            Scalar::Float(rng.gen_range(-1.0..=1.0)),
            Scalar::Float(rng.gen_range(-0.8..=0.8)),
        )
    } else {
        random_float_finite(rng, 8)
    }
}

/// A dual member: geometric ratios up to 3 on Λ∞, up to 1/3 on Λ₁.
pub fn random_dual<R: Rng>(rng: &mut R, space_type: SpaceType) -> Symbol {
    if rng.gen_bool(0.5) {
        let r_max = if space_type == SpaceType::Infinite {
            3.0
        } else {
            1.0 / 3.0
        };
        Symbol::geometric(
            Scalar::Float(rng.gen_range(-1.0..=1.0)),
            Scalar::Float(rng.gen_range(-r_max..=r_max)),
        )
    } else {
        random_float_finite(rng, 8)
    }
}

fn members(cfg: &SweepConfig, tag: u64, f: impl Fn(&mut ChaCha8Rng) -> Symbol) -> Vec<Symbol> {
    (0..cfg.symbols)
        .map(|i| f(&mut case_rng(cfg.seed ^ tag, i)))
        .collect()
}

fn bounded(space: &SpaceSpec, s: &Symbol, k: u32) -> Result<f64> {
    match symbol_seminorm(space, s, k)? {
        SymbolNorm::Bounded(b) => Ok(b.ln_upper()),
        SymbolNorm::Divergent => Err(Error::NotMember { grade: k }),
    }
}

fn space_tag(space: &SpaceSpec) -> &'static str {
    match space.space_type {
        SpaceType::Finite => "finite",
        SpaceType::Infinite => "infinite",
    }
}

// ---------------------------------------------------------------- inequalities

/// ‖T̂_θe_n‖_p ≤ ‖θ‖_{2p}·‖e_n‖_{2p}.
pub fn hat_continuity(space: &SpaceSpec, cfg: &SweepConfig, exec: Exec) -> Result<CheckResult> {
    let syms = members(cfg, 1, |r| random_member(r, space.space_type));
    let parts = exec.map(syms.len(), |i| -> Result<Tally> {
        let theta = &syms[i];
        let mut t = Tally::default();
        for p in 1..=cfg.p {
            let ln_theta = bounded(space, theta, 2 * p)?;
            for n in 1..=cfg.n {
                let col = hat_column(theta, n, n + DEFAULT_TRUNCATION)?;
                let lhs = space.seminorm(&col, p)?.ln_upper();
                let rhs = ln_theta + ln_basis_norm(space, n, 2.0 * p as f64);
                t.slack(rel_slack_ln(lhs, rhs), || {
                    format!("symbol {i}, n = {n}, p = {p}")
                });
            }
        }
        Ok(t)
    });
    merge_all(parts, &format!("hat_continuity_{}", space_tag(space)))
}

/// ‖T̂^k_θe_n‖_p ≤ ‖θ‖_{2p}^k·‖e_n‖_{2p}.
pub fn hat_power(space: &SpaceSpec, cfg: &SweepConfig, exec: Exec) -> Result<CheckResult> {
    let syms = members(cfg, 2, |r| random_member(r, space.space_type));
    let parts = exec.map(syms.len(), |i| -> Result<Tally> {
        let theta = &syms[i];
        let table = ConvPowerTable::build(theta, cfg.k, cfg.n + DEFAULT_TRUNCATION)?;
        let ln_theta: Vec<f64> = (1..=cfg.p)
            .map(|p| bounded(space, theta, 2 * p))
            .collect::<Result<_>>()?;
        let mut t = Tally::default();
        for k in 1..=cfg.k {
            let pk = table.power(k);
            for n in 1..=cfg.n {
                let col = hat_column(pk, n, n + DEFAULT_TRUNCATION)?;
                for p in 1..=cfg.p {
                    let lhs = space.seminorm(&col, p)?.ln_upper();
                    let rhs = k as f64 * ln_theta[p as usize - 1]
                        + ln_basis_norm(space, n, 2.0 * p as f64);
                    t.slack(rel_slack_ln(lhs, rhs), || {
                        format!("symbol {i}, k = {k}, n = {n}, p = {p}")
                    });
                }
            }
        }
        Ok(t)
    });
    merge_all(parts, &format!("hat_power_{}", space_tag(space)))
}

/// ‖Ť_βe_n‖_p ≤ C₀·D·‖e_n‖_{p+m₀+m₁} on Λ∞(n).
pub fn dual_continuity(cfg: &SweepConfig, exec: Exec) -> Result<CheckResult> {
    let space = SpaceSpec::lambda_inf_linear();
    let syms = members(cfg, 3, |r| random_dual(r, SpaceType::Infinite));
    let parts = exec.map(syms.len(), |i| -> Result<Tally> {
        let op = OperatorSpec::check(space.clone(), syms[i].clone(), None)?;
        let cert = op.dual.expect("check operators carry a dual certificate");
        let nuc = op
            .nuclearity
            .as_ref()
            .expect("check operators carry nuclearity data");
        let (m1, d) = match (nuc.m1, nuc.d) {
            (Some(m1), Some(d)) => (m1, d),
            _ => return Err(Error::HypothesisUnmet("no nuclearity constants".into())),
        };
        let mut t = Tally::default();
        for n in 1..=cfg.n {
            let col = check_column(&syms[i], n)?;
            for p in 1..=cfg.p {
                let lhs = space.seminorm(&col, p)?.ln_upper();
                let rhs =
                    cert.c0.ln() + d.ln() + ln_basis_norm(&space, n, (p + cert.m0 + m1) as f64);
                t.slack(rel_slack_ln(lhs, rhs), || {
                    format!("symbol {i}, n = {n}, p = {p}")
                });
            }
        }
        Ok(t)
    });
    merge_all(parts, "dual_continuity")
}

/// Which closed-form strong-tameness bound to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TameCase {
    /// T̂_θ on Λ₁(n): Ĉ_p ≤ e^{1/(2p)}‖θ‖_{2p}.
    HatFinite,
    /// T̂_θ on Λ∞(n): Ĉ_p ≤ ‖θ‖_p.
    HatInfinite,
    /// Ť_β on Λ∞(n): Ĉ_p ≤ A = Σ|β_i|.
    CheckInfinite,
    /// Ť_β on Λ₁(n): Ĉ_p ≤ B = Σ|β_i|e^{i+1}.
    CheckFinite,
}

impl TameCase {
    pub const ALL: [TameCase; 4] = [
        TameCase::HatFinite,
        TameCase::HatInfinite,
        TameCase::CheckInfinite,
        TameCase::CheckFinite,
    ];

    fn name(self) -> &'static str {
        match self {
            TameCase::HatFinite => "tame_hat_finite",
            TameCase::HatInfinite => "tame_hat_infinite",
            TameCase::CheckInfinite => "tame_check_infinite",
            TameCase::CheckFinite => "tame_check_finite",
        }
    }
}

/// Ĉ_p = sup_{n≤N}‖Te_n‖_p/‖e_n‖_p against the closed-form bound.
pub fn tame_bounds(case: TameCase, cfg: &SweepConfig, exec: Exec) -> Result<CheckResult> {
    let space = match case {
        TameCase::HatFinite | TameCase::CheckFinite => SpaceSpec::lambda1_linear(),
        _ => SpaceSpec::lambda_inf_linear(),
    };
    let tag = 4 + case as u64;
    let syms = match case {
        TameCase::HatFinite | TameCase::HatInfinite => {
            members(cfg, tag, |r| random_member(r, space.space_type))
        }
        _ => members(cfg, tag, |r| random_dual(r, space.space_type)),
    };
    let parts = exec.map(syms.len(), |i| -> Result<Tally> {
        let s = &syms[i];
        let op = match case {
            TameCase::HatFinite | TameCase::HatInfinite => {
                OperatorSpec::hat(space.clone(), s.clone())?
            }
            _ => OperatorSpec::check(space.clone(), s.clone(), None)?,
        };
        let mut t = Tally::default();
        for p in 1..=cfg.p {
            let ln_bound = match case {
                TameCase::HatFinite => 1.0 / (2.0 * p as f64) + bounded(&space, s, 2 * p)?,
                TameCase::HatInfinite => bounded(&space, s, p)?,
                TameCase::CheckInfinite => ell1_norm_in(&space, s)?.upper().ln(),
                TameCase::CheckFinite => symbol_seminorm_exponent(&space, s, 1.0)?.ln_upper(),
            };
            let c_hat = crate::classify::ln_tame_constant(&op, p, cfg.n, Exec::Sequential)?;
            t.slack(rel_slack_ln(c_hat, ln_bound), || {
                format!("symbol {i}, p = {p}")
            });
        }
        Ok(t)
    });
    merge_all(parts, case.name())
}

/// Σ_{j≤n} e^{p·j} ≤ D·e^{(p+m₁)·n} on Λ∞(n), with m₁ and D from the
/// nuclearity certificate.
pub fn nuclear_sum(n_max: usize, p_max: u32) -> Result<CheckResult> {
    let nuc = nuclearity_check(&SpaceSpec::lambda_inf_linear(), 256);
    let (m1, d) = match (nuc.m1, nuc.d) {
        (Some(m1), Some(d)) => (m1 as f64, d),
        _ => {
            return Err(Error::HypothesisUnmet(
                "no nuclearity constants for Λ∞(n)".into(),
            ))
        }
    };
    let mut t = Tally::default();
    for p in 1..=p_max {
        let pf = p as f64;
        let mut ln_lhs = f64::NEG_INFINITY;
        for n in 1..=n_max {
            ln_lhs = ln_add(ln_lhs, pf * n as f64);
            let rhs = d.ln() + (pf + m1) * n as f64;
            t.slack(rel_slack_ln(ln_lhs, rhs), || format!("n = {n}, p = {p}"));
        }
    }
    Ok(t.finish("nuclear_sum"))
}

/// n·e^{−n/k} ≤ D_k·e^{−n/(2k)} with D_k from the module.
pub fn fnd_sup(n_max: usize, k_max: u32) -> Result<CheckResult> {
    let alpha = ExponentSequence::linear();
    let mut t = Tally::default();
    for k in 1..=k_max {
        let d = fnd_constant(&alpha, k)
            .ok_or_else(|| Error::HypothesisUnmet("no D_k for α = n".into()))?;
        let kf = k as f64;
        for n in 1..=n_max {
            let nf = n as f64;
            t.slack(
                rel_slack_ln(nf.ln() - nf / kf, d.ln() - nf / (2.0 * kf)),
                || format!("n = {n}, k = {k}"),
            );
        }
    }
    Ok(t.finish("fnd_sup"))
}

pub fn inequality_checks(cfg: &SweepConfig, exec: Exec) -> Result<Vec<CheckResult>> {
    let l1 = SpaceSpec::lambda1_linear();
    let li = SpaceSpec::lambda_inf_linear();
    let mut out = vec![
        hat_continuity(&l1, cfg, exec)?,
        hat_continuity(&li, cfg, exec)?,
        hat_power(&l1, cfg, exec)?,
        hat_power(&li, cfg, exec)?,
        dual_continuity(cfg, exec)?,
    ];
    for case in TameCase::ALL {
        out.push(tame_bounds(case, cfg, exec)?);
    }
    out.push(nuclear_sum(10_000, 8)?);
    out.push(fnd_sup(10_000, 8)?);
    Ok(out)
}

// ---------------------------------------------------------------- identities

fn same_vectors(a: &Element, b: &Element) -> Result<bool> {
    let len = a.len().max(b.len());
    Ok(element_vector(a, len)? == element_vector(b, len)?)
}

/// Columns of T̂_φT̂_θ equal those of T̂_{φ*θ}, and a chain of up to
/// `k_fold` factors equals the operator of the full convolution.
pub fn hat_composition(cfg: &IdentityConfig, exec: Exec) -> Result<CheckResult> {
    let parts = exec.map(cfg.cases, |i| -> Result<Tally> {
        let mut rng = case_rng(cfg.seed ^ 11, i);
        let k = 2 + i % cfg.k_fold.max(2).saturating_sub(1);
        let syms: Vec<Symbol> = (0..k)
            .map(|_| random_rational_symbol(&mut rng, 6))
            .collect();
        let n_len = cfg.n * 8;
        let pair = compose_hat(&syms[0], &syms[1], n_len);
        let chain = syms[1..]
            .iter()
            .fold(syms[0].clone(), |acc, s| compose_hat(s, &acc, n_len));
        let mut ok = true;
        for n in 1..=cfg.n {
            let e = Element::basis(n);
            let lhs = hat_apply(&syms[0], &hat_apply(&syms[1], &e)?)?;
            ok &= same_vectors(&lhs, &hat_column(&pair, n, cfg.n)?)?;
            let mut x = e;
            for s in &syms {
                x = hat_apply(s, &x)?;
            }
            ok &= same_vectors(&x, &hat_column(&chain, n, cfg.n)?)?;
        }
        let mut t = Tally::default();
        t.exact(ok, || format!("case {i} ({k}-fold)"));
        Ok(t)
    });
    merge_all(parts, "hat_composition")
}

/// N×N truncations of Ť_βŤ_ψ equal those of Ť_{ψ*β}, on the main path
/// (column by column) and in the dense oracle; chains as for the hat case.
pub fn check_composition(cfg: &IdentityConfig, exec: Exec) -> Result<CheckResult> {
    let parts = exec.map(cfg.cases, |i| -> Result<Tally> {
        let mut rng = case_rng(cfg.seed ^ 12, i);
        let k = 2 + i % cfg.k_fold.max(2).saturating_sub(1);
        let syms: Vec<Symbol> = (0..k)
            .map(|_| random_rational_symbol(&mut rng, 6))
            .collect();
        let n = cfg.n;
        let pair = compose_check(&syms[0], &syms[1], n);
        let chain = syms[1..]
            .iter()
            .fold(syms[0].clone(), |acc, s| compose_check(s, &acc, n));
        let mut ok = true;
        for j in 1..=n {
            let e = Element::basis(j);
            let lhs = check_apply(&syms[0], &check_apply(&syms[1], &e)?)?;
            ok &= same_vectors(&lhs, &check_column(&pair, j)?)?;
            let mut x = e;
            for s in &syms {
                x = check_apply(s, &x)?;
            }
            ok &= same_vectors(&x, &check_column(&chain, j)?)?;
        }
        let dense = |s: &Symbol| DenseTrunc::from_symbols(None, Some(s), n);
        let prod = dense(&syms[0])?.mul(&dense(&syms[1])?)?;
        ok &= prod.m == dense(&pair)?.m;
        let mut t = Tally::default();
        t.exact(ok, || format!("case {i} ({k}-fold)"));
        Ok(t)
    });
    merge_all(parts, "check_composition")
}

/// A random certified operator and a finitely supported input, both exact.
pub fn random_apply_case(seed: u64, i: usize) -> Result<(OperatorSpec, Element)> {
    let mut rng = case_rng(seed ^ 13, i);
    let space = if i % 2 == 0 {
        SpaceSpec::lambda1_linear()
    } else {
        SpaceSpec::lambda_inf_linear()
    };
    let theta = random_rational_symbol(&mut rng, 6);
    let beta = random_rational_symbol(&mut rng, 6);
    let op = match (i / 2) % 3 {
        0 => OperatorSpec::hat(space, theta)?,
        1 => OperatorSpec::check(space, beta, None)?,
        _ => OperatorSpec::toeplitz(space, theta, beta, None)?,
    };
    let len = rng.gen_range(1..=16);
    let x = Element::finite(Coeffs::Exact(
        (0..len).map(|_| random_rational(&mut rng)).collect(),
    ));
    Ok((op, x))
}

/// Main-path `apply` against the dense exact truncation.
pub fn oracle_apply(cfg: &IdentityConfig, exec: Exec) -> Result<CheckResult> {
    let parts = exec.map(cfg.cases, |i| -> Result<Tally> {
        let (op, x) = random_apply_case(cfg.seed, i)?;
        let y = op.apply(&x)?;
        let dim = cfg.n.max(x.len()).max(y.len());
        let want = dense_apply(&DenseTrunc::from_op(&op, dim)?, &element_vector(&x, dim)?)?;
        let mut t = Tally::default();
        t.exact(element_vector(&y, dim)? == want, || {
            format!("case {i} ({})", op.kind_name())
        });
        Ok(t)
    });
    merge_all(parts, "oracle_apply")
}

pub fn identity_checks(cfg: &IdentityConfig, exec: Exec) -> Result<Vec<CheckResult>> {
    Ok(vec![
        hat_composition(cfg, exec)?,
        check_composition(cfg, exec)?,
        oracle_apply(cfg, exec)?,
    ])
}

// ---------------------------------------------------------------- classifiers

fn geo(c: (i64, i64), r: (i64, i64)) -> Symbol {
    Symbol::geometric(Scalar::ratio(c.0, c.1), Scalar::ratio(r.0, r.1))
}

fn fin(v: &[(i64, i64)]) -> Symbol {
    Symbol::from_scalars(
        &v.iter()
            .map(|&(p, q)| Scalar::ratio(p, q))
            .collect::<Vec<_>>(),
    )
}

/// Thirty certified operators across both spaces and all three kinds.
pub fn hierarchy_battery() -> Result<Vec<OperatorSpec>> {
    let l1 = SpaceSpec::lambda1_linear;
    let li = SpaceSpec::lambda_inf_linear;
    let mut ops = Vec::new();
    for theta in [
        fin(&[(1, 1)]),
        fin(&[(1, 2)]),
        fin(&[(0, 1), (1, 1)]),
        fin(&[(1, 1), (1, 1)]),
        fin(&[(1, 2), (1, 2)]),
        fin(&[(1, 4), (1, 4), (1, 4)]),
        geo((1, 2), (1, 2)),
        geo((1, 1), (1, 2)),
        geo((1, 4), (-1, 2)),
        fin(&[(-1, 1)]),
        fin(&[(2, 1)]),
        fin(&[(0, 1), (0, 1), (1, 1)]),
    ] {
        ops.push(OperatorSpec::hat(l1(), theta)?);
    }
    for theta in [
        fin(&[(1, 1)]),
        fin(&[(1, 2)]),
        fin(&[(0, 1), (1, 1)]),
        fin(&[(1, 1), (1, 1)]),
        fin(&[(1, 2), (1, 4)]),
        fin(&[(2, 1)]),
        fin(&[(-1, 3), (1, 3)]),
    ] {
        ops.push(OperatorSpec::hat(li(), theta)?);
    }
    for beta in [
        fin(&[(0, 1), (1, 1)]),
        fin(&[(1, 2)]),
        geo((1, 2), (2, 1)),
        fin(&[(2, 1), (1, 1)]),
    ] {
        ops.push(OperatorSpec::check(li(), beta, None)?);
    }
    for beta in [fin(&[(0, 1), (1, 2)]), fin(&[(1, 2)]), geo((1, 4), (1, 4))] {
        ops.push(OperatorSpec::check(l1(), beta, None)?);
    }
    ops.push(OperatorSpec::toeplitz(
        l1(),
        fin(&[(1, 4)]),
        fin(&[(0, 1), (1, 4)]),
        None,
    )?);
    ops.push(OperatorSpec::toeplitz(
        li(),
        fin(&[(1, 2)]),
        fin(&[(0, 1), (1, 4)]),
        None,
    )?);
    ops.push(OperatorSpec::toeplitz(
        li(),
        fin(&[(0, 1), (1, 1)]),
        fin(&[(0, 1), (1, 1)]),
        None,
    )?);
    ops.push(OperatorSpec::toeplitz(
        l1(),
        fin(&[(1, 1)]),
        fin(&[(0, 1), (1, 1)]),
        None,
    )?);
    Ok(ops)
}

pub const HIERARCHY_PROPS: [Property; 5] = [
    Property::Topologizable,
    Property::MTopologizable,
    Property::PowerBounded,
    Property::CesaroBounded,
    Property::StronglyTame,
];

fn status_of(v: &[Verdict], p: Property) -> Status {
    v.iter()
        .find(|x| x.property == p)
        .map_or(Status::Inconclusive, |x| x.status)
}

/// Implications hold, no contradictions are raised, and doubling the grid
/// leaves every decisive verdict unchanged.
pub fn hierarchy(grid: &GridParams, exec: Exec) -> Result<Vec<CheckResult>> {
    let ops = hierarchy_battery()?;
    let parts = exec.map(ops.len(), |i| -> Result<(Tally, Tally, Tally, Tally)> {
        let (mut imp, mut contra, mut stable, mut replay) = Default::default();
        let at = || {
            format!(
                "operator {i} ({} on {})",
                ops[i].kind_name(),
                ops[i].space.describe()
            )
        };
        let base = classify(&ops[i], &HIERARCHY_PROPS, grid, Exec::Sequential);
        let big = classify(&ops[i], &HIERARCHY_PROPS, &grid.doubled(), Exec::Sequential);
        let (base, big) = match (base, big) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                Tally::exact(&mut contra, false, at);
                return Ok((imp, contra, stable, replay));
            }
        };
        contra.exact(true, at);
        for v in [&base, &big] {
            let pb = status_of(v, Property::PowerBounded);
            let ok = pb != Status::Holds
                || (status_of(v, Property::MTopologizable) == Status::Holds
                    && status_of(v, Property::Topologizable) == Status::Holds);
            imp.exact(ok, at);
        }
        for v in &base {
            if v.is_decisive() {
                stable.exact(status_of(&big, v.property) == v.status, || {
                    format!("{}: {}", at(), v.property.name())
                });
                replay.exact(replay_verdict(v).unwrap_or(false), || {
                    format!("{}: {}", at(), v.property.name())
                });
            }
        }
        Ok((imp, contra, stable, replay))
    });
    let mut acc: [Tally; 4] = Default::default();
    for p in parts {
        let (a, b, c, d) = p?;
        acc[0].merge(a);
        acc[1].merge(b);
        acc[2].merge(c);
        acc[3].merge(d);
    }
    let [a, b, c, d] = acc;
    Ok(vec![
        a.finish("hierarchy_implications"),
        b.finish("hierarchy_consistency"),
        c.finish("grid_stability"),
        d.finish("verdict_replay"),
    ])
}

/// Geometric(1/2,1/2) is power bounded on Λ₁(n), [1,1] is not, both verdicts
/// replay, and ‖T̂^k e₁‖₁ grows strictly for [1,1].
pub fn fp_decisiveness(grid: &GridParams) -> Result<CheckResult> {
    let l1 = SpaceSpec::lambda1_linear();
    let mut t = Tally::default();
    let holds = classify_hat_power_bounded_finite(&l1, &geo((1, 2), (1, 2)), grid)?;
    t.exact(
        holds.status == Status::Holds && replay_verdict(&holds)?,
        || "Geometric(1/2,1/2)".into(),
    );
    let ones = fin(&[(1, 1), (1, 1)]);
    let fails = classify_hat_power_bounded_finite(&l1, &ones, grid)?;
    t.exact(
        fails.status == Status::Fails && replay_verdict(&fails)?,
        || "[1,1]".into(),
    );
    let rec = orbit(&OperatorSpec::hat(l1, ones)?, &Element::basis(1), 32, &[1])?;
    let norms: Vec<f64> = rec.rows.iter().map(|r| r.norm.value()).collect();
    t.exact(
        norms.len() == 32 && norms.windows(2).all(|w| w[1] > w[0]),
        || "orbit of [1,1]".into(),
    );
    Ok(t.finish("fp_decisiveness"))
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Cesàro behaviour of T̂_{δ₀}, T̂_{δ₀/2} and the shift on Λ₁(n) against
/// closed forms.
pub fn ergodic_probes(k_max: usize, p_max: u32, exec: Exec) -> Result<Vec<CheckResult>> {
    let l1 = SpaceSpec::lambda1_linear();
    let grid = GridParams {
        n: 16,
        k: k_max,
        p: p_max,
        ..GridParams::default()
    };
    let grades: Vec<u32> = (1..=p_max).collect();

    let mut id = Tally::default();
    let x = Element::from_ints(&[1, 2, 3]);
    let rep = mean_ergodic_probe(
        &OperatorSpec::hat(l1.clone(), Symbol::from_ints(&[1]))?,
        &x,
        &grid,
        exec,
    )?;
    id.exact(same_vectors(&rep.limit, &x)?, || {
        "limit differs from x".into()
    });
    for d in &rep.differences {
        id.exact(d.value == 0.0, || {
            format!("difference at k = {}, p = {}", d.k, d.p)
        });
    }

    let mut half = Tally::default();
    let rec = orbit(
        &OperatorSpec::hat(l1.clone(), fin(&[(1, 2)]))?,
        &Element::basis(1),
        k_max,
        &grades,
    )?;
    for r in &rec.rows {
        let scaled = r.cesaro.upper() * r.k as f64;
        let e = (-1.0 / r.p as f64).exp();
        let closed = (1.0 - 0.5f64.powi(r.k as i32)) * e;
        half.exact(rel_gap(scaled, closed) <= SLACK_TOL, || {
            format!("k = {}, p = {}", r.k, r.p)
        });
        half.slack(rel_slack_ln(scaled.ln(), e.ln()), || {
            format!("k = {}, p = {}", r.k, r.p)
        });
    }

    let mut shift = Tally::default();
    let rec = orbit(
        &OperatorSpec::hat(l1, Symbol::from_ints(&[0, 1]))?,
        &Element::basis(1),
        k_max,
        &grades,
    )?;
    for &p in &grades {
        let mut prev = f64::INFINITY;
        for k in 1..=k_max {
            let v = rec.row(k, p).expect("orbit row").cesaro.upper();
            let closed = (2..=k + 1)
                .map(|j| (-(j as f64) / p as f64).exp())
                .sum::<f64>()
                / k as f64;
            shift.exact(rel_gap(v, closed) <= SLACK_TOL && v < prev, || {
                format!("k = {k}, p = {p}")
            });
            prev = v;
        }
    }
    Ok(vec![
        id.finish("ergodic_identity"),
        half.finish("ergodic_half"),
        shift.finish("ergodic_shift"),
    ])
}

pub fn classifier_checks(grid: &GridParams, exec: Exec) -> Result<Vec<CheckResult>> {
    let mut out = vec![fp_decisiveness(grid)?];
    out.extend(hierarchy(grid, exec)?);
    out.extend(ergodic_probes(64, 8, exec)?);
    Ok(out)
}

// ---------------------------------------------------------------- laurent

fn inv_two_minus_z() -> Result<HoloSymbol> {
    HoloSymbol::rational(vec![1.0], vec![2.0, -1.0], 0.0, 2.0, Intended::Disc)
}

/// max_{0≤n≤20}|a_n − 2^{−n−1}| for 1/(2−z) at r = 0.9, M = 512, against 1e−10.
pub fn quadrature_geometric() -> Result<CheckResult> {
    let c = laurent_coeffs(&inv_two_minus_z()?, 0.9, 0, 20, Some(512))?;
    let mut worst = 0.0f64;
    let mut at = 0;
    for n in 0..=20 {
        let g = (c.get(n).expect("in window") - 0.5f64.powi(n as i32 + 1)).norm();
        if g > worst {
            worst = g;
            at = n;
        }
    }
    let mut t = Tally::default();
    t.slack(rel_slack_ln(worst.ln(), 1e-10f64.ln()), || {
        format!("n = {at}, |error| = {worst:.3e}")
    });
    Ok(t.finish("quadrature_geometric"))
}

/// z^m gives a_n = δ_{n,m} within 1e−13 for r ∈ (0, 2] and M = 4|m|+4.
pub fn quadrature_monomials() -> Result<CheckResult> {
    let mut t = Tally::default();
    for m in -6i32..=6 {
        let mut num = vec![0.0; m.max(0) as usize + 1];
        let mut den = vec![0.0; (-m).max(0) as usize + 1];
        *num.last_mut().unwrap() = 1.0;
        *den.last_mut().unwrap() = 1.0;
        let f = HoloSymbol::rational(num, den, 0.0, f64::INFINITY, Intended::Entire)?;
        for r in [0.25, 0.5, 1.0, 1.5, 2.0] {
            let samples = 4 * m.unsigned_abs() as usize + 4;
            let c = laurent_coeffs(&f, r, m as i64 - 2, m as i64 + 2, Some(samples))?;
            for n in c.indices() {
                let want = if n == m as i64 { 1.0 } else { 0.0 };
                let gap = (c.get(n).expect("in window") - want).norm();
                t.slack(rel_slack_ln(gap.ln(), 1e-13f64.ln()), || {
                    format!("m = {m}, r = {r}, n = {n}")
                });
            }
        }
    }
    Ok(t.finish("quadrature_monomials"))
}

/// Rational symbols with their pole-free radius.
pub fn rational_test_set() -> Result<Vec<(HoloSymbol, f64)>> {
    Ok(vec![
        (inv_two_minus_z()?, 2.0),
        (
            HoloSymbol::rational(vec![1.0, 0.5], vec![1.2, -1.0], 0.0, 1.2, Intended::Disc)?,
            1.2,
        ),
        (
            HoloSymbol::rational(vec![1.0], vec![6.0, -1.0, -1.0], 0.0, 2.0, Intended::Disc)?,
            2.0,
        ),
        (
            HoloSymbol::rational(
                vec![0.0, 3.0, 1.0],
                vec![4.0, 0.0, 1.0],
                0.0,
                2.0,
                Intended::Disc,
            )?,
            2.0,
        ),
    ])
}

/// Coefficients at r = 0.5 and r = 0.9 agree within the summed error estimates.
pub fn radius_independence() -> Result<CheckResult> {
    let mut t = Tally::default();
    for (i, (f, _)) in rational_test_set()?.iter().enumerate() {
        let a = laurent_coeffs(f, 0.5, -4, 20, None)?;
        let b = laurent_coeffs(f, 0.9, -4, 20, None)?;
        for n in a.indices() {
            let gap = (a.get(n).unwrap() - b.get(n).unwrap()).norm();
            let allowed = a.err_at(n).unwrap() + b.err_at(n).unwrap();
            t.slack(rel_slack_ln(gap.ln(), allowed.ln()), || {
                format!("function {i}, n = {n}")
            });
        }
    }
    Ok(t.finish("radius_independence"))
}

/// The reported error strictly decreases over three doublings of M.
pub fn error_decay() -> Result<CheckResult> {
    let mut t = Tally::default();
    for (i, (f, pole)) in rational_test_set()?.iter().enumerate() {
        let r = 0.75 * pole;
        let errs: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&m| {
                Ok(laurent_coeffs(f, r, 0, 3, Some(m))?
                    .err
                    .iter()
                    .copied()
                    .fold(0.0, f64::max))
            })
            .collect::<Result<_>>()?;
        t.exact(errs.windows(2).all(|w| w[1] < w[0]), || {
            format!("function {i}: {errs:?}")
        });
    }
    Ok(t.finish("error_decay"))
}

/// e^{1/z} on H(ℂ): the literal coefficient sum is e within 1e−8 and the
/// Toeplitz operator is m-topologizable; 1/(2−z) on H(𝔻) gives a geometric θ,
/// β = 0 and an m-topologizable operator.
pub fn function_toeplitz(grid: &GridParams) -> Result<CheckResult> {
    let mut t = Tally::default();
    let e_inv = HoloSymbol::new(
        HoloSource::ExpMonomial { c: 1.0, m: -1 },
        0.0,
        f64::INFINITY,
        Intended::Entire,
    )?;
    let li = SpaceSpec::lambda_inf_linear();
    let ft = toeplitz_from_function(&e_inv, &li, 1.0, 16, None)?;
    let gap = (ft.literal_sum - std::f64::consts::E).abs();
    t.slack(rel_slack_ln(gap.ln(), 1e-8f64.ln()), || {
        format!("e^(1/z): |A − e| = {gap:.3e}")
    });
    let v = classify_toeplitz(&li, &ft.split.theta, &ft.split.beta, grid)?;
    t.exact(v.m_top.status == Status::Holds, || {
        "e^(1/z): m-top not Holds".into()
    });

    let l1 = SpaceSpec::lambda1_linear();
    let ft = toeplitz_from_function(&inv_two_minus_z()?, &l1, 0.9, 16, None)?;
    t.exact(
        ft.split.theta_shape == SplitShape::Geometric
            && ft.split.beta.is_zero()
            && ft.split_sum == 0.0,
        || "1/(2−z): split".into(),
    );
    let v = classify_toeplitz(&l1, &ft.split.theta, &ft.split.beta, grid)?;
    t.exact(v.m_top.status == Status::Holds, || {
        "1/(2−z): m-top not Holds".into()
    });
    Ok(t.finish("function_toeplitz"))
}

pub fn laurent_checks(grid: &GridParams) -> Result<Vec<CheckResult>> {
    Ok(vec![
        quadrature_geometric()?,
        quadrature_monomials()?,
        radius_independence()?,
        error_decay()?,
        function_toeplitz(grid)?,
    ])
}

// ---------------------------------------------------------------- runner

pub fn run_suite(suite: Suite, exec: Exec) -> Result<SuiteReport> {
    let grid = GridParams::default();
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Inequalities {
        checks.extend(inequality_checks(&SweepConfig::default(), exec)?);
    }
    if all || suite == Suite::Identities {
        checks.extend(identity_checks(&IdentityConfig::default(), exec)?);
    }
    if all || suite == Suite::Classifiers {
        checks.extend(classifier_checks(&grid, exec)?);
    }
    if all || suite == Suite::Laurent {
        checks.extend(laurent_checks(&grid)?);
    }
    let passed = checks.iter().all(CheckResult::passed);
    Ok(SuiteReport {
        suite,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for s in [
            Suite::Inequalities,
            Suite::Identities,
            Suite::Classifiers,
            Suite::Laurent,
            Suite::All,
        ] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(
            "bogus".parse::<Suite>(),
            Err(Error::UnknownSuite("bogus".into()))
        );
    }

    #[test]
    fn helper_inequalities() {
        assert!(nuclear_sum(2_000, 8).unwrap().passed());
        assert!(fnd_sup(2_000, 8).unwrap().passed());
    }

    #[test]
    fn small_sweeps() {
        let cfg = SweepConfig {
            n: 16,
            p: 3,
            k: 4,
            symbols: 6,
            seed: 3,
        };
        let l1 = SpaceSpec::lambda1_linear();
        assert!(hat_continuity(&l1, &cfg, Exec::Sequential)
            .unwrap()
            .passed());
        assert!(
            hat_continuity(&SpaceSpec::lambda_inf_linear(), &cfg, Exec::Sequential)
                .unwrap()
                .passed()
        );
        assert!(dual_continuity(&cfg, Exec::Sequential).unwrap().passed());
    }

    #[test]
    fn power_inequality_counterexample() {
        // T̂_{δ₀} = I: ‖e₁‖₁ = e^{−1} exceeds ‖δ₀‖₂²·‖e₁‖₂ = e^{−3/2} at k = 2.
        let l1 = SpaceSpec::lambda1_linear();
        let lhs = l1.seminorm(&Element::basis(1), 1).unwrap().ln_upper();
        let ln_delta = bounded(&l1, &Symbol::from_ints(&[1]), 2).unwrap();
        let rhs = 2.0 * ln_delta + ln_basis_norm(&l1, 1, 2.0);
        assert!(rel_slack_ln(lhs, rhs) < -0.5);
    }

    #[test]
    fn small_identities() {
        let cfg = IdentityConfig {
            cases: 12,
            n: 12,
            k_fold: 4,
            seed: 5,
        };
        for c in identity_checks(&cfg, Exec::Sequential).unwrap() {
            assert!(c.passed(), "{}", c.line());
        }
    }

    #[test]
    fn laurent_suite_passes() {
        for c in laurent_checks(&GridParams::default()).unwrap() {
            assert!(c.passed(), "{}", c.line());
        }
    }
}
