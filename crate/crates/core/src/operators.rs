//! The convolution operator T̂_θ, the dual convolution operator Ť_β, their
//! sum T_{θ,β}, powers, Cesàro means and truncated matrices.

use std::fmt::Write as _;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::num::{ext_f64, format_rational, rel_slack_ln, Coeffs, Rational, Ring, Scalar};
use crate::spaces::{
    dual_certificate_check, nuclearity_check, stability_constant, DualCertificate, DualCheck,
    NormBound, NuclearityCert, SpaceSpec, SpaceType, StabilityCert,
};
use crate::symbols::{
    conv_power, convolve, membership_check, ConvPowerTable, Membership, Symbol, DEFAULT_TRUNCATION,
};
use crate::tail::{Decay, Envelope, TailCert};

/// Grades used when validating symbol membership.
pub const MEMBERSHIP_GRID: [u32; 8] = [1, 2, 3, 4, 5, 6, 7, 8];
/// Prefix length used for dual certificates and stability ratios.
pub const CERT_PREFIX: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorKind {
    Hat { theta: Symbol },
    Check { beta: Symbol },
    Toeplitz { theta: Symbol, beta: Symbol },
}

/// An operator on a power series space together with the certificates its
/// constructor established.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub space: SpaceSpec,
    pub membership: Option<Membership>,
    pub dual: Option<DualCertificate>,
    pub dual_check: Option<DualCheck>,
    pub stability: Option<StabilityCert>,
    pub nuclearity: Option<NuclearityCert>,
}

impl OperatorSpec {
    /// Operator without certificate checks, for algebra in tests and oracles.
    pub fn unchecked(space: SpaceSpec, kind: OperatorKind) -> Self {
        OperatorSpec {
            kind,
            space,
            membership: None,
            dual: None,
            dual_check: None,
            stability: None,
            nuclearity: None,
        }
    }

    /// T̂_θ; requires θ in the space on the membership grid.
    pub fn hat(space: SpaceSpec, theta: Symbol) -> Result<Self> {
        let mut op = OperatorSpec::unchecked(space, OperatorKind::Hat { theta });
        op.certify_theta()?;
        Ok(op)
    }

    /// Ť_β; fits a dual certificate when none is given.
    pub fn check(space: SpaceSpec, beta: Symbol, cert: Option<DualCertificate>) -> Result<Self> {
        let mut op = OperatorSpec::unchecked(space, OperatorKind::Check { beta });
        op.certify_beta(cert)?;
        Ok(op)
    }

    /// T_{θ,β} = T̂_θ + Ť_β with diagonal θ₀ + β₀.
    pub fn toeplitz(
        space: SpaceSpec,
        theta: Symbol,
        beta: Symbol,
        cert: Option<DualCertificate>,
    ) -> Result<Self> {
        let mut op = OperatorSpec::unchecked(space, OperatorKind::Toeplitz { theta, beta });
        op.certify_theta()?;
        op.certify_beta(cert)?;
        Ok(op)
    }

    /// Toeplitz operator from a two-sided sequence: `nonneg` = (a₀, a₁, …),
    /// `neg` = (a₋₁, a₋₂, …), with the diagonal split a₀ = θ₀ + β₀.
    pub fn two_sided(
        space: SpaceSpec,
        nonneg: &[Scalar],
        neg: &[Scalar],
        beta0: Scalar,
        cert: Option<DualCertificate>,
    ) -> Result<Self> {
        let mut theta: Vec<Scalar> = nonneg.to_vec();
        if theta.is_empty() {
            theta.push(Scalar::zero());
        }
        theta[0] = theta[0].sub(&beta0);
        let mut beta = vec![beta0];
        beta.extend_from_slice(neg);
        OperatorSpec::toeplitz(
            space,
            Symbol::from_scalars(&theta),
            Symbol::from_scalars(&beta),
            cert,
        )
    }

    fn certify_theta(&mut self) -> Result<()> {
        let theta = self.theta().expect("operator has θ").clone();
        let m = membership_check(&self.space, &theta, &MEMBERSHIP_GRID)?;
        if let Some(g) = m.grades.iter().find(|g| g.norm.is_none()) {
            return Err(Error::NotMember { grade: g.grade });
        }
        self.membership = Some(m);
        if self.space.space_type == SpaceType::Infinite {
            self.stability = Some(stability_constant(&self.space.alpha, CERT_PREFIX));
        }
        Ok(())
    }

    fn certify_beta(&mut self, cert: Option<DualCertificate>) -> Result<()> {
        let beta = self.beta().expect("operator has β").clone();
        let cert = match cert {
            Some(c) => c,
            None => DualCertificate::fit(&self.space, &beta, CERT_PREFIX, 32)?,
        };
        let chk = dual_certificate_check(&self.space, &beta, &cert, CERT_PREFIX)?;
        if let Some(n) = chk.violation {
            return Err(Error::DualMembershipViolated { n });
        }
        let nuc = nuclearity_check(&self.space, CERT_PREFIX);
        if self.space.space_type == SpaceType::Finite {
            if !nuc.nuclear {
                return Err(Error::HypothesisUnmet(format!(
                    "{} is not nuclear",
                    self.space.describe()
                )));
            }
            self.stability = Some(stability_constant(&self.space.alpha, CERT_PREFIX));
        }
        self.nuclearity = Some(nuc);
        self.dual = Some(cert);
        self.dual_check = Some(chk);
        Ok(())
    }

    pub fn theta(&self) -> Option<&Symbol> {
        match &self.kind {
            OperatorKind::Hat { theta } | OperatorKind::Toeplitz { theta, .. } => Some(theta),
            OperatorKind::Check { .. } => None,
        }
    }

    pub fn beta(&self) -> Option<&Symbol> {
        match &self.kind {
            OperatorKind::Check { beta } | OperatorKind::Toeplitz { beta, .. } => Some(beta),
            OperatorKind::Hat { .. } => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            OperatorKind::Hat { .. } => "hat",
            OperatorKind::Check { .. } => "check",
            OperatorKind::Toeplitz { .. } => "toeplitz",
        }
    }

    /// T x.
    pub fn apply(&self, x: &Element) -> Result<Element> {
        match &self.kind {
            OperatorKind::Hat { theta } => hat_apply(theta, x),
            OperatorKind::Check { beta } => check_apply(beta, x),
            OperatorKind::Toeplitz { theta, beta } => toeplitz_apply(theta, beta, x),
        }
    }

    /// T e_n.
    pub fn column(&self, n: usize, trunc: usize) -> Result<Element> {
        match &self.kind {
            OperatorKind::Hat { theta } => hat_column(theta, n, trunc),
            OperatorKind::Check { beta } => check_column(beta, n),
            OperatorKind::Toeplitz { theta, beta } => {
                hat_column(theta, n, trunc)?.add(&check_column(beta, n)?)
            }
        }
    }
}

/// T̂_θ e_n = Σ_{j≥n} θ_{j−n} e_j, stored up to index max(N, n) for
/// infinite θ and exactly for finite θ.
pub fn hat_column(theta: &Symbol, n: usize, trunc: usize) -> Result<Element> {
    if n == 0 {
        return Err(Error::InvalidArgument("basis index starts at 1".into()));
    }
    let lead = n - 1;
    let shift_values = |v: &Coeffs| -> Coeffs {
        match v {
            Coeffs::Exact(w) => {
                let mut o = vec![Rational::zero(); lead];
                o.extend(w.iter().cloned());
                Coeffs::Exact(o)
            }
            Coeffs::Float(w) => {
                let mut o = vec![0.0; lead];
                o.extend_from_slice(w);
                Coeffs::Float(o)
            }
        }
    };
    match theta {
        Symbol::Finite(c) => Ok(Element::finite(shift_values(&c.trimmed()))),
        _ => {
            let want = trunc.max(n) - lead;
            let len = theta.readable_len().map_or(want, |r| r.min(want));
            let tail = match theta.tail_cert() {
                TailCert::Envelope(e) => TailCert::Envelope(e.with_shift(lead)),
                t => t,
            };
            Element::new(shift_values(&theta.prefix(len)), tail)
        }
    }
}

/// Ť_β e_n = Σ_{j=1}^{n} β_{n−j} e_j.
pub fn check_column(beta: &Symbol, n: usize) -> Result<Element> {
    if n == 0 {
        return Err(Error::InvalidArgument("basis index starts at 1".into()));
    }
    let b = exact_prefix(beta, n)?;
    let rev = match b {
        Coeffs::Exact(mut v) => {
            v.reverse();
            Coeffs::Exact(v)
        }
        Coeffs::Float(mut v) => {
            v.reverse();
            Coeffs::Float(v)
        }
    };
    Ok(Element::finite(rev))
}

/// The first `n` coefficients, failing when sampled data runs out.
pub fn exact_prefix(s: &Symbol, n: usize) -> Result<Coeffs> {
    if let Some(r) = s.readable_len() {
        if r < n {
            return Err(Error::OutOfSampledRange { index: r, len: r });
        }
    }
    Ok(s.prefix(n))
}

/// θ*x with the default output truncation.
pub fn hat_apply(theta: &Symbol, x: &Element) -> Result<Element> {
    hat_apply_trunc(theta, x, x.len() + DEFAULT_TRUNCATION)
}

fn conv_exact_or_float(a: &Coeffs, b: &Coeffs, n: usize) -> Coeffs {
    match (a, b) {
        (Coeffs::Exact(x), Coeffs::Exact(y)) => Coeffs::Exact(crate::num::convolve_slices(x, y, n)),
        _ => Coeffs::Float(crate::num::convolve_slices(
            &a.to_f64_vec(),
            &b.to_f64_vec(),
            n,
        )),
    }
}

/// θ*x storing `n_out` entries when θ is infinite. Finite θ with finite x
/// gives the exact full product.
pub fn hat_apply_trunc(theta: &Symbol, x: &Element, n_out: usize) -> Result<Element> {
    match x.tail() {
        TailCert::FinitelySupported => {
            let xv = x.values().trimmed();
            let l = xv.len();
            if l == 0 || theta.is_zero() {
                return Ok(Element::zero());
            }
            if let Symbol::Finite(c) = theta {
                let t = c.trimmed();
                return Ok(Element::finite(conv_exact_or_float(
                    &xv,
                    &t,
                    l + t.len() - 1,
                )));
            }
            let mut n = n_out.max(l);
            if let Some(r) = theta.readable_len() {
                n = n.min(r);
            }
            if n + 1 < l {
                return Err(Error::OutOfSampledRange {
                    index: l - 1,
                    len: n,
                });
            }
            let values = conv_exact_or_float(&xv, &theta.prefix(n), n);
            let tail = match theta.tail_cert() {
                TailCert::Envelope(e) => TailCert::Envelope(compose_finite_input(&e, &xv)),
                t => t,
            };
            Element::new(values, tail)
        }
        TailCert::Envelope(ex) => {
            let Symbol::Finite(c) = theta else {
                return Err(Error::TailUnbounded);
            };
            let t = c.trimmed();
            if t.is_empty() {
                return Ok(Element::zero());
            }
            let Decay::Geometric { rho } = ex.decay else {
                return Err(Error::TailUnbounded);
            };
            if rho == 0.0 {
                return Err(Error::TailUnbounded);
            }
            let len = x.len();
            let values = conv_exact_or_float(x.values(), &t, len);
            // Fold the last known entries of x into one envelope from the shift on.
            let s = t.len();
            let lr = rho.ln();
            let mut ln_c = ex.c.ln();
            let xa = x.values().ln_abs_vec();
            let from = len.saturating_sub(s - 1);
            for (j, l) in xa.iter().enumerate().skip(from) {
                ln_c = ln_c.max(l + (ex.shift as f64 - j as f64) * lr);
            }
            let ta = t.ln_abs_vec();
            let terms: Vec<f64> = ta
                .iter()
                .enumerate()
                .map(|(i, l)| l - i as f64 * lr)
                .collect();
            let c = (ln_c + crate::num::log_sum_exp(&terms)).exp() * (1.0 + 1e-12);
            if !c.is_finite() {
                return Err(Error::TailUnbounded);
            }
            Element::new(
                values,
                TailCert::Envelope(Envelope {
                    c,
                    decay: ex.decay,
                    shift: ex.shift,
                }),
            )
        }
        TailCert::Uncertified => Err(Error::TailUnbounded),
    }
}

/// Envelope of θ*x beyond index L−1 for finitely supported x of length L.
fn compose_finite_input(e: &Envelope, xv: &Coeffs) -> Envelope {
    let l = xv.len();
    let xa = xv.to_f64_vec();
    match e.decay {
        Decay::Geometric { rho } => {
            let s: f64 = xa
                .iter()
                .enumerate()
                .map(|(a, v)| v.abs() * rho.powi((l - 1 - a) as i32))
                .sum();
            Envelope {
                c: e.c * s * (1.0 + 1e-12),
                decay: e.decay,
                shift: l - 1,
            }
        }
        Decay::Exponential { rate } => {
            let s: f64 = xa.iter().map(|v| v.abs()).sum();
            let shift = if rate <= 0.0 { l - 1 } else { 0 };
            Envelope {
                c: e.c * s * (1.0 + 1e-12),
                decay: e.decay,
                shift,
            }
        }
    }
}

/// β⋆x for finitely supported x: (β⋆x)_n = Σ_{j≥n} x_j β_{j−n}.
pub fn check_apply(beta: &Symbol, x: &Element) -> Result<Element> {
    if !x.is_finitely_supported() {
        return Err(Error::TailUnbounded);
    }
    let xv = x.values().trimmed();
    let l = xv.len();
    if l == 0 {
        return Ok(Element::zero());
    }
    let b = exact_prefix(beta, l)?;
    fn kernel<T: Ring>(x: &[T], b: &[T]) -> Vec<T> {
        let l = x.len();
        let mut out = vec![T::zero(); l];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for n0 in 0..=i {
                let bij = &b[i - n0];
                if !bij.is_zero() {
                    out[n0] = out[n0].clone() + xi.clone() * bij.clone();
                }
            }
        }
        out
    }
    let values = match (&xv, &b) {
        (Coeffs::Exact(x), Coeffs::Exact(b)) => Coeffs::Exact(kernel(x, b)),
        _ => Coeffs::Float(kernel(&xv.to_f64_vec(), &b.to_f64_vec())),
    };
    Ok(Element::finite(values))
}

/// (T̂_θ + Ť_β)x.
pub fn toeplitz_apply(theta: &Symbol, beta: &Symbol, x: &Element) -> Result<Element> {
    let h = hat_apply(theta, x)?;
    let c = check_apply(beta, x)?;
    h.add(&c)
}

/// T^k x: symbol route for Hat and Check, iteration for Toeplitz.
pub fn power_apply(op: &OperatorSpec, k: usize, x: &Element) -> Result<Element> {
    if k == 0 {
        return Err(Error::InvalidArgument("power needs k ≥ 1".into()));
    }
    let n = x.len() + DEFAULT_TRUNCATION;
    match &op.kind {
        OperatorKind::Hat { theta } => hat_apply_trunc(&conv_power(theta, k, n)?, x, n),
        OperatorKind::Check { beta } => {
            let l = x.values().support_len().max(1);
            check_apply(&conv_power(beta, k, l)?, x)
        }
        OperatorKind::Toeplitz { theta, beta } => {
            let mut y = toeplitz_apply(theta, beta, x)?;
            for _ in 1..k {
                y = toeplitz_apply(theta, beta, &y)?;
            }
            Ok(y)
        }
    }
}

/// Orbit T x, T² x, …, T^K x.
pub fn orbit_elements(op: &OperatorSpec, x: &Element, k_max: usize) -> Result<Vec<Element>> {
    let n = x.len() + DEFAULT_TRUNCATION;
    let mut out = Vec::with_capacity(k_max);
    match &op.kind {
        OperatorKind::Hat { theta } => {
            // Exact powers of infinite symbols grow rational heights fast and
            // are truncated anyway; finite symbols stay exact.
            let base = if theta.is_finite() {
                theta.clone()
            } else {
                theta.to_float()
            };
            let t = ConvPowerTable::build(&base, k_max.max(1), n)?;
            for k in 1..=k_max {
                out.push(hat_apply_trunc(t.power(k), x, n)?);
            }
        }
        OperatorKind::Check { beta } => {
            let l = x.values().support_len().max(1);
            let t = ConvPowerTable::build(beta, k_max.max(1), l)?;
            for k in 1..=k_max {
                out.push(check_apply(t.power(k), x)?);
            }
        }
        OperatorKind::Toeplitz { theta, beta } => {
            let mut y = x.clone();
            for _ in 0..k_max {
                y = toeplitz_apply(theta, beta, &y)?;
                out.push(y.clone());
            }
        }
    }
    Ok(out)
}

fn sum_elements(items: &[Element]) -> Result<Element> {
    let mut acc = items[0].clone();
    for e in &items[1..] {
        acc = add_aligned(&acc, e)?;
    }
    Ok(acc)
}

/// Sum that first pads finitely supported parts to a common length.
pub fn add_aligned(a: &Element, b: &Element) -> Result<Element> {
    let n = a.len().max(b.len());
    a.padded(n).add(&b.padded(n))
}

/// T^{[k]}x = (1/k)·Σ_{m=1}^{k} T^m x.
pub fn cesaro_mean(op: &OperatorSpec, k: usize, x: &Element) -> Result<Element> {
    if k == 0 {
        return Err(Error::InvalidArgument("Cesàro mean needs k ≥ 1".into()));
    }
    let orbit = orbit_elements(op, x, k)?;
    Ok(sum_elements(&orbit)?.scale(&Scalar::ratio(1, k as i64)))
}

/// One (k, p) row of an orbit table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub k: usize,
    pub p: u32,
    pub norm: NormBound,
    pub cesaro: NormBound,
    /// ‖T^k x‖_p / ‖T^{k−1} x‖_p (k ≥ 2).
    #[serde(with = "ext_f64::opt")]
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub op: OperatorSpec,
    pub start: Element,
    pub grades: Vec<u32>,
    pub rows: Vec<OrbitRow>,
    /// ‖T^{[k]}x‖_p ≤ (1/k)Σ_{m≤k}‖T^m x‖_p on every row.
    pub triangle_ok: bool,
    #[serde(with = "ext_f64")]
    pub min_triangle_slack: f64,
}

impl OrbitRecord {
    pub fn row(&self, k: usize, p: u32) -> Option<&OrbitRow> {
        self.rows.iter().find(|r| r.k == k && r.p == p)
    }

    /// CSV with columns k,p,norm,cesaro_norm,tail_bound.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,p,norm,cesaro_norm,tail_bound\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.k,
                r.p,
                fmt_sci(r.norm.value()),
                fmt_sci(r.cesaro.value()),
                fmt_sci(r.norm.tail().max(r.cesaro.tail()))
            );
        }
        s
    }
}

/// 17 significant digits.
pub fn fmt_sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Seminorm table of the orbit and its Cesàro means.
pub fn orbit(op: &OperatorSpec, x: &Element, k_max: usize, grades: &[u32]) -> Result<OrbitRecord> {
    let elems = orbit_elements(op, x, k_max)?;
    let mut rows = Vec::with_capacity(k_max * grades.len());
    let mut running: Option<Element> = None;
    let mut sums = vec![0.0f64; grades.len()];
    let mut prev: Vec<Option<f64>> = vec![None; grades.len()];
    let mut min_slack = f64::INFINITY;
    for (i, e) in elems.iter().enumerate() {
        let k = i + 1;
        running = Some(match running {
            None => e.clone(),
            Some(acc) => add_aligned(&acc, e)?,
        });
        let mean = running.as_ref().unwrap().scale(&Scalar::ratio(1, k as i64));
        for (gi, &p) in grades.iter().enumerate() {
            let norm = op.space.seminorm(e, p)?;
            let ces = op.space.seminorm(&mean, p)?;
            sums[gi] += norm.upper();
            let slack = rel_slack_ln(ces.ln_value, (sums[gi] / k as f64).ln());
            min_slack = min_slack.min(slack);
            let ratio = prev[gi].map(|pv| (norm.ln_value - pv).exp());
            prev[gi] = Some(norm.ln_value);
            rows.push(OrbitRow {
                k,
                p,
                norm,
                cesaro: ces,
                ratio,
            });
        }
    }
    Ok(OrbitRecord {
        op: op.clone(),
        start: x.clone(),
        grades: grades.to_vec(),
        rows,
        triangle_ok: min_slack >= -1e-12,
        min_triangle_slack: min_slack,
    })
}

/// Row-major N×N truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub n: usize,
    pub entries: Coeffs,
}

impl DenseMatrix {
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.entries.get(i * self.n + j)
    }

    /// Headerless row-major CSV; exact entries as p/q.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| match self.get(i, j) {
                    Scalar::Exact(q) => format_rational(&q),
                    Scalar::Float(v) => fmt_sci(v),
                })
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Entry (i, j) = θ_{i−j} below and β_{j−i} above the diagonal, θ₀ + β₀ on it.
pub fn toeplitz_matrix(theta: &Symbol, beta: &Symbol, n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix size must be ≥ 1".into()));
    }
    let t = exact_prefix(theta, n)?;
    let b = exact_prefix(beta, n)?;
    fn fill<T: Ring>(t: &[T], b: &[T], n: usize) -> Vec<T> {
        let mut m = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = T::zero();
                if i >= j {
                    v = v + t[i - j].clone();
                }
                if j >= i {
                    v = v + b[j - i].clone();
                }
                m[i * n + j] = v;
            }
        }
        m
    }
    let entries = match (&t, &b) {
        (Coeffs::Exact(t), Coeffs::Exact(b)) => Coeffs::Exact(fill(t, b, n)),
        _ => Coeffs::Float(fill(&t.to_f64_vec(), &b.to_f64_vec(), n)),
    };
    Ok(DenseMatrix { n, entries })
}

/// φ*θ, the symbol of T̂_φT̂_θ.
pub fn compose_hat(phi: &Symbol, theta: &Symbol, n: usize) -> Symbol {
    convolve(phi, theta, n)
}

/// ψ*β, the symbol of Ť_βŤ_ψ.
pub fn compose_check(beta: &Symbol, psi: &Symbol, n: usize) -> Symbol {
    convolve(psi, beta, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::SpaceSpec;

    fn el(v: &[i64]) -> Element {
        Element::from_ints(v)
    }

    #[test]
    fn hat_column_examples() {
        let c = hat_column(&Symbol::from_ints(&[1, 1]), 2, 8).unwrap();
        assert!(c.same_values(&el(&[0, 1, 1])));
        let c = hat_column(&Symbol::from_ints(&[1]), 7, 8).unwrap();
        assert!(c.same_values(&Element::basis(7)));
        let g = Symbol::geometric(Scalar::int(1), Scalar::ratio(1, 2));
        let c = hat_column(&g, 1, 64).unwrap();
        let b = SpaceSpec::lambda1_linear().seminorm(&c, 1).unwrap();
        let e1 = (-1f64).exp();
        let want = e1 / (1.0 - e1 / 2.0);
        assert!(b.value() <= want && (b.upper() - want).abs() <= 1e-14 * want);
    }

    #[test]
    fn check_column_examples() {
        let b = Symbol::finite(Coeffs::from_scalars(&[
            Scalar::int(1),
            Scalar::ratio(1, 2),
            Scalar::ratio(1, 4),
        ]));
        let c = check_column(&b, 3).unwrap();
        assert_eq!(
            c.values(),
            &Coeffs::from_scalars(&[Scalar::ratio(1, 4), Scalar::ratio(1, 2), Scalar::int(1)])
        );
        assert!(check_column(&Symbol::from_ints(&[1]), 5)
            .unwrap()
            .same_values(&Element::basis(5)));
        let c = check_column(&Symbol::from_ints(&[7, 9]), 1).unwrap();
        assert!(c.same_values(&el(&[7])));
    }

    #[test]
    fn apply_examples() {
        let x = el(&[3, -1, 2]);
        assert!(hat_apply(&Symbol::from_ints(&[1]), &x)
            .unwrap()
            .same_values(&x));
        assert!(hat_apply(&Symbol::from_ints(&[0, 1]), &Element::basis(1))
            .unwrap()
            .same_values(&Element::basis(2)));
        assert!(hat_apply(&Symbol::from_ints(&[1, 1]), &el(&[1, 1]))
            .unwrap()
            .same_values(&el(&[1, 2, 1])));
        assert!(check_apply(&Symbol::from_ints(&[1]), &x)
            .unwrap()
            .same_values(&x));
        assert!(check_apply(&Symbol::from_ints(&[0, 1]), &Element::basis(2))
            .unwrap()
            .same_values(&Element::basis(1)));
        assert!(check_apply(&Symbol::from_ints(&[1, 1]), &el(&[1, 1]))
            .unwrap()
            .same_values(&el(&[2, 1])));
        let half = Symbol::delta(Scalar::ratio(1, 2));
        assert!(toeplitz_apply(&half, &half, &x).unwrap().same_values(&x));
        let s = Symbol::from_ints(&[0, 1]);
        assert!(toeplitz_apply(&s, &s, &Element::basis(2))
            .unwrap()
            .same_values(&el(&[1, 0, 1])));
        let t = toeplitz_apply(
            &Symbol::from_ints(&[1, 1]),
            &Symbol::from_ints(&[0, 2]),
            &el(&[1, 1]),
        )
        .unwrap();
        assert!(t.same_values(&el(&[3, 2, 1])));
    }

    #[test]
    fn check_apply_rejects_tails() {
        let g = Symbol::geometric(Scalar::int(1), Scalar::ratio(1, 2));
        let x = g.as_element(8).unwrap();
        assert_eq!(
            check_apply(&Symbol::from_ints(&[1]), &x),
            Err(Error::TailUnbounded)
        );
    }

    #[test]
    fn power_examples() {
        let sp = SpaceSpec::lambda1_linear();
        let x = el(&[2, 0, 5]);
        let id = OperatorSpec::hat(sp.clone(), Symbol::from_ints(&[1])).unwrap();
        assert!(power_apply(&id, 9, &x).unwrap().same_values(&x));
        let h = OperatorSpec::hat(sp.clone(), Symbol::from_ints(&[1, 1])).unwrap();
        assert!(power_apply(&h, 2, &Element::basis(1))
            .unwrap()
            .same_values(&el(&[1, 2, 1])));
        let c = OperatorSpec::check(sp, Symbol::from_ints(&[1, 1]), None).unwrap();
        assert!(power_apply(&c, 2, &Element::basis(3))
            .unwrap()
            .same_values(&el(&[1, 2, 1])));
    }

    #[test]
    fn cesaro_examples() {
        let sp = SpaceSpec::lambda1_linear();
        let x = el(&[1, 4]);
        let id = OperatorSpec::hat(sp.clone(), Symbol::from_ints(&[1])).unwrap();
        assert!(cesaro_mean(&id, 10, &x).unwrap().same_values(&x));
        let half = OperatorSpec::hat(sp.clone(), Symbol::delta(Scalar::ratio(1, 2))).unwrap();
        let m = cesaro_mean(&half, 2, &Element::basis(1)).unwrap();
        assert_eq!(m.get(1), Scalar::ratio(3, 8));
        let shift = OperatorSpec::hat(sp, Symbol::from_ints(&[0, 1])).unwrap();
        let m = cesaro_mean(&shift, 3, &Element::basis(1)).unwrap();
        let third = Scalar::ratio(1, 3);
        assert_eq!(
            m.values().trimmed(),
            Coeffs::from_scalars(&[Scalar::int(0), third.clone(), third.clone(), third])
        );
    }

    #[test]
    fn matrix_examples() {
        let m = toeplitz_matrix(&Symbol::from_ints(&[1]), &Symbol::zero(), 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), Scalar::int((i == j) as i64));
            }
        }
        let s = Symbol::from_ints(&[0, 1]);
        let m = toeplitz_matrix(&s, &s, 2).unwrap();
        assert_eq!(m.entries, Coeffs::from_ints(&[0, 1, 1, 0]));
        let m =
            toeplitz_matrix(&Symbol::from_ints(&[1, 2]), &Symbol::from_ints(&[0, 3]), 2).unwrap();
        assert_eq!(m.entries, Coeffs::from_ints(&[1, 3, 2, 1]));
        assert_eq!(m.to_csv(), "1,3\n2,1\n");
    }

    #[test]
    fn compose_examples() {
        let g = Symbol::from_ints(&[3, 1, 4]);
        assert_eq!(compose_hat(&Symbol::from_ints(&[1]), &g, 16), g);
        let a = Symbol::from_ints(&[1, 1]);
        assert_eq!(compose_hat(&a, &a, 16), Symbol::from_ints(&[1, 2, 1]));
        assert_eq!(
            compose_check(&a, &Symbol::from_ints(&[1, 0, 1]), 16),
            Symbol::from_ints(&[1, 1, 1, 1])
        );
    }

    #[test]
    fn two_sided_split() {
        let sp = SpaceSpec::lambda_inf_linear();
        let op = OperatorSpec::two_sided(
            sp,
            &[Scalar::int(4), Scalar::int(1)],
            &[Scalar::int(2)],
            Scalar::int(1),
            None,
        )
        .unwrap();
        assert_eq!(op.theta().unwrap(), &Symbol::from_ints(&[3, 1]));
        assert_eq!(op.beta().unwrap(), &Symbol::from_ints(&[1, 2]));
        let m = toeplitz_matrix(op.theta().unwrap(), op.beta().unwrap(), 2).unwrap();
        assert_eq!(m.entries, Coeffs::from_ints(&[4, 2, 1, 4]));
    }

    #[test]
    fn hat_rejects_non_members() {
        let g = Symbol::geometric(Scalar::int(1), Scalar::int(2));
        assert!(matches!(
            OperatorSpec::hat(SpaceSpec::lambda1_linear(), g),
            Err(Error::NotMember { grade: 2 })
        ));
    }

    #[test]
    fn orbit_shift_table() {
        let sp = SpaceSpec::lambda1_linear();
        let shift = OperatorSpec::hat(sp, Symbol::from_ints(&[0, 1])).unwrap();
        let rec = orbit(&shift, &Element::basis(1), 6, &[1, 2]).unwrap();
        assert!(rec.triangle_ok);
        let r = rec.row(3, 2).unwrap();
        assert!((r.norm.value() - (-4.0f64 / 2.0).exp()).abs() < 1e-15);
        assert!(rec
            .to_csv()
            .starts_with("k,p,norm,cesaro_norm,tail_bound\n1,1,"));
    }

    #[test]
    fn infinite_theta_orbit_keeps_envelopes() {
        let sp = SpaceSpec::lambda1_linear();
        let g = Symbol::geometric(Scalar::ratio(1, 2), Scalar::ratio(1, 2));
        let op = OperatorSpec::hat(sp, g).unwrap();
        let rec = orbit(&op, &Element::basis(1), 8, &[1, 4]).unwrap();
        assert!(rec.triangle_ok);
        for r in &rec.rows {
            assert!(
                r.norm.tail() < 1e-20,
                "k={} p={} tail={}",
                r.k,
                r.p,
                r.norm.tail()
            );
        }
    }
}
