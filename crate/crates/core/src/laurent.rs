//! Laurent coefficients of holomorphic symbols by trapezoidal quadrature on
//! circles, and the split of a coefficient window into (θ, β).

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{ext_f64, Coeffs, Rational, Scalar};
use crate::operators::{fmt_sci, OperatorSpec};
use crate::spaces::{SpaceSpec, SpaceType};
use crate::symbols::{ell1_norm_in, symbol_seminorm_exponent, SampleExtension, Symbol};
use crate::tail::Envelope;

/// Relative threshold on min |den| over a contour, against Σ|den_i|r^i.
pub const POLE_THRESHOLD: f64 = 1e-10;

/// Which function space the symbol is meant for: H(ℂ) ≅ Λ∞(n), H(𝔻) ≅ Λ₁(n).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intended {
    Entire,
    Disc,
}

pub type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// How F is evaluated on the contour.
#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HoloSource {
    /// num(z)/den(z), coefficients in increasing powers of z.
    Rational { num: Vec<f64>, den: Vec<f64> },
    /// exp(c·z^m)
    ExpMonomial { c: f64, m: i32 },
    /// Caller-supplied evaluator; analyticity is trusted.
    #[serde(skip)]
    BlackBox(Evaluator),
}

impl fmt::Debug for HoloSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoloSource::Rational { num, den } => f
                .debug_struct("Rational")
                .field("num", num)
                .field("den", den)
                .finish(),
            HoloSource::ExpMonomial { c, m } => f
                .debug_struct("ExpMonomial")
                .field("c", c)
                .field("m", m)
                .finish(),
            HoloSource::BlackBox(_) => f.write_str("BlackBox"),
        }
    }
}

fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// F holomorphic on the annulus r_inner < |z| < r_outer.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoloSymbol {
    pub source: HoloSource,
    #[serde(default)]
    pub r_inner: f64,
    #[serde(with = "ext_f64", default = "infinite")]
    pub r_outer: f64,
    pub intended: Intended,
}

fn infinite() -> f64 {
    f64::INFINITY
}

impl HoloSymbol {
    pub fn new(source: HoloSource, r_inner: f64, r_outer: f64, intended: Intended) -> Result<Self> {
        let h = HoloSymbol {
            source,
            r_inner,
            r_outer,
            intended,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn rational(
        num: Vec<f64>,
        den: Vec<f64>,
        r_inner: f64,
        r_outer: f64,
        intended: Intended,
    ) -> Result<Self> {
        Self::new(
            HoloSource::Rational { num, den },
            r_inner,
            r_outer,
            intended,
        )
    }

    pub fn black_box<F>(f: F, r_inner: f64, r_outer: f64, intended: Intended) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(
            HoloSource::BlackBox(Arc::new(f)),
            r_inner,
            r_outer,
            intended,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_inner >= 0.0 && self.r_inner < self.r_outer) {
            return Err(Error::InvalidArgument(format!(
                "annulus needs 0 ≤ r_inner < r_outer, got ({}, {})",
                self.r_inner, self.r_outer
            )));
        }
        if let HoloSource::Rational { num, den } = &self.source {
            let finite = num.iter().chain(den).all(|v| v.is_finite());
            if !finite || den.iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidArgument(
                    "rational symbol needs finite coefficients and a nonzero denominator".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match &self.source {
            HoloSource::Rational { num, den } => horner(num, z) / horner(den, z),
            HoloSource::ExpMonomial { c, m } => (z.powi(*m) * *c).exp(),
            HoloSource::BlackBox(f) => f(z),
        }
    }

    /// PoleOnContour when a rational denominator nearly vanishes on the samples.
    fn check_contour(&self, samples: &[Complex64], r: f64) -> Result<()> {
        if let HoloSource::Rational { den, .. } = &self.source {
            let scale: f64 = den
                .iter()
                .enumerate()
                .map(|(i, d)| d.abs() * r.powi(i as i32))
                .sum();
            let min = samples
                .iter()
                .map(|z| horner(den, *z).norm())
                .fold(f64::INFINITY, f64::min);
            if !(min > POLE_THRESHOLD * scale) {
                return Err(Error::PoleOnContour { radius: r });
            }
        }
        Ok(())
    }
}

/// a_n for n_min ≤ n ≤ n_max with per-coefficient error estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentCoeffs {
    pub n_min: i64,
    pub n_max: i64,
    pub r: f64,
    pub m: usize,
    /// (re, im) of a_n, in index order.
    pub values: Vec<(f64, f64)>,
    pub err: Vec<f64>,
    pub warnings: Vec<String>,
}

impl LaurentCoeffs {
    pub fn get(&self, n: i64) -> Option<Complex64> {
        if n < self.n_min || n > self.n_max {
            return None;
        }
        let (re, im) = self.values[(n - self.n_min) as usize];
        Some(Complex64::new(re, im))
    }

    pub fn err_at(&self, n: i64) -> Option<f64> {
        (n >= self.n_min && n <= self.n_max).then(|| self.err[(n - self.n_min) as usize])
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }

    /// CSV with columns n,re,im,err.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,re,im,err\n");
        for (i, n) in self.indices().enumerate() {
            let (re, im) = self.values[i];
            let _ = writeln!(
                s,
                "{n},{},{},{}",
                fmt_sci(re),
                fmt_sci(im),
                fmt_sci(self.err[i])
            );
        }
        s
    }
}

/// Default sample count: next power of two ≥ max(64, 4·window).
pub fn default_samples(n_min: i64, n_max: i64) -> usize {
    let window = (n_max - n_min + 1).max(1) as usize;
    (4 * window).max(64).next_power_of_two()
}

/// Trapezoidal sums a_n = (1/M)Σ_j F(rω^j)(rω^j)^{−n} for all n at once.
fn trapezoid(
    f: &HoloSymbol,
    r: f64,
    m: usize,
    n_min: i64,
    n_max: i64,
) -> Result<(Vec<Complex64>, f64)> {
    let step = std::f64::consts::TAU / m as f64;
    let points: Vec<Complex64> = (0..m)
        .map(|j| Complex64::from_polar(r, step * j as f64))
        .collect();
    f.check_contour(&points, r)?;
    let mut buf: Vec<Complex64> = points.iter().map(|z| f.eval(*z)).collect();
    if buf.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::PoleOnContour { radius: r });
    }
    let fmax = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
    FftPlanner::<f64>::new()
        .plan_fft_forward(m)
        .process(&mut buf);
    let ln_r = r.ln();
    let out = (n_min..=n_max)
        .map(|n| {
            let bin = n.rem_euclid(m as i64) as usize;
            buf[bin] * ((-(n as f64) * ln_r).exp() / m as f64)
        })
        .collect();
    Ok((out, fmax))
}

/// Laurent coefficients on |z| = r with M samples (default when `None`).
/// The error estimate compares against 2M samples and adds a rounding term.
pub fn laurent_coeffs(
    f: &HoloSymbol,
    r: f64,
    n_min: i64,
    n_max: i64,
    m: Option<usize>,
) -> Result<LaurentCoeffs> {
    f.validate()?;
    if n_min > n_max {
        return Err(Error::InvalidArgument(format!(
            "empty window [{n_min}, {n_max}]"
        )));
    }
    if !(r > f.r_inner && r < f.r_outer) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} outside the annulus ({}, {})",
            f.r_inner, f.r_outer
        )));
    }
    let window = (n_max - n_min + 1) as usize;
    let m = m.unwrap_or_else(|| default_samples(n_min, n_max));
    if m < 2 {
        return Err(Error::InvalidArgument("quadrature needs M ≥ 2".into()));
    }
    let mut warnings = Vec::new();
    if m < 2 * window {
        warnings.push(format!(
            "alias risk: M = {m} below 2·window = {}",
            2 * window
        ));
    }
    let (a, fmax) = trapezoid(f, r, m, n_min, n_max)?;
    let (a2, _) = trapezoid(f, r, 2 * m, n_min, n_max)?;
    let log_m = (m as f64).log2().max(1.0);
    let err = (n_min..=n_max)
        .zip(a.iter().zip(&a2))
        .map(|(n, (x, y))| (x - y).norm() + 8.0 * f64::EPSILON * fmax * r.powf(-(n as f64)) * log_m)
        .collect();
    Ok(LaurentCoeffs {
        n_min,
        n_max,
        r,
        m,
        values: a.iter().map(|c| (c.re, c.im)).collect(),
        err,
        warnings,
    })
}

/// v as p/q with q ≤ 64 when within tol, for clean closed forms.
fn snap(v: f64, tol: f64) -> Option<Rational> {
    for q in 1..=64i64 {
        let p = (v * q as f64).round();
        if (v * q as f64 - p).abs() <= tol * q as f64 && p.abs() < 1e15 {
            return Some(Rational::new((p as i64).into(), q.into()));
        }
    }
    None
}

/// Coefficient classes recognised by [`symbol_split`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitShape {
    Zero,
    Finite,
    Geometric,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitSymbols {
    pub theta: Symbol,
    pub beta: Symbol,
    pub theta_shape: SplitShape,
    pub beta_shape: SplitShape,
}

/// Ratio agreement needed to call a run of coefficients geometric.
const GEOMETRIC_TOL: f64 = 1e-9;
/// Trailing zeros needed to call a half finitely supported.
const FINITE_TRAILING: usize = 4;

/// Build a symbol from a_0, a_1, … (real parts, noise already zeroed).
fn fit_half(v: &[f64], err: &[f64]) -> Result<(Symbol, SplitShape)> {
    let last = v.iter().rposition(|x| *x != 0.0);
    let Some(last) = last else {
        return Ok((Symbol::zero(), SplitShape::Zero));
    };
    if v.len() - 1 - last >= FINITE_TRAILING {
        let tol = |i: usize| 10.0 * err[i] + 1e-13;
        let snapped: Option<Vec<Rational>> = v[..=last]
            .iter()
            .enumerate()
            .map(|(i, x)| snap(*x, tol(i)))
            .collect();
        let coeffs = match snapped {
            Some(q) => Coeffs::Exact(q),
            None => Coeffs::Float(v[..=last].to_vec()),
        };
        return Ok((Symbol::Finite(coeffs), SplitShape::Finite));
    }
    let nz: Vec<(usize, f64)> = v
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, x)| *x != 0.0)
        .collect();
    let contiguous = nz.len() == last + 1;
    if contiguous && nz.len() >= 3 {
        let ratios: Vec<f64> = v.windows(2).map(|w| w[1] / w[0]).collect();
        let r0 = ratios[0];
        if r0.abs() < 1.0
            && ratios
                .iter()
                .all(|r| (r - r0).abs() <= GEOMETRIC_TOL * r0.abs().max(1e-300))
        {
            let c = match snap(v[0], 1e-12) {
                Some(q) => Scalar::Exact(q),
                None => Scalar::Float(v[0]),
            };
            let r = match snap(r0, 1e-12) {
                Some(q) => Scalar::Exact(q),
                None => Scalar::Float(r0),
            };
            return Ok((Symbol::geometric(c, r), SplitShape::Geometric));
        }
    }
    // Least squares of ln|a_n| on n, then inflate until the envelope dominates.
    let pts: Vec<(f64, f64)> = nz.iter().map(|(i, x)| (*i as f64, x.abs().ln())).collect();
    let (ln_c, ln_rho) = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        (my - slope * mx, slope)
    } else {
        (pts[0].1, -1.0)
    };
    let res: Vec<f64> = pts.iter().map(|(x, y)| y - (ln_c + ln_rho * x)).collect();
    let (rmax, rmin) = res
        .iter()
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), r| {
            (a.max(*r), b.min(*r))
        });
    let span = pts.last().unwrap().0.max(1.0);
    let mut ln_c = ln_c + rmax + std::f64::consts::LN_2;
    let ln_rho = ln_rho + 0.5 * (rmax - rmin) / span;
    if !(ln_rho < 0.0) {
        return Err(Error::CertificateFitFailed(format!(
            "fitted decay rate e^{ln_rho:.3} does not decay"
        )));
    }
    let values = Coeffs::Float(v.to_vec());
    for _ in 0..64 {
        let env = Envelope::geometric(ln_c.exp(), ln_rho.exp())?;
        if let Ok(s) = Symbol::sampled(values.clone(), Some(env), SampleExtension::None) {
            return Ok((s, SplitShape::Sampled));
        }
        ln_c += std::f64::consts::LN_2;
    }
    Err(Error::CertificateFitFailed(
        "envelope does not dominate the coefficients".into(),
    ))
}

/// θ_n = a_n (n ≥ 0) and β_n = a_{−n} (n ≥ 1) with β₀ = 0.
pub fn symbol_split(c: &LaurentCoeffs) -> Result<SplitSymbols> {
    let scale = c
        .values
        .iter()
        .map(|(re, im)| re.hypot(*im))
        .fold(0.0, f64::max);
    let clean = |n: i64| -> Result<(f64, f64)> {
        let Some(a) = c.get(n) else {
            return Ok((0.0, 0.0));
        };
        let e = c.err_at(n).unwrap();
        let noise = 10.0 * e + 4.0 * f64::EPSILON * scale;
        if a.im.abs() > noise.max(1e-12 * a.norm()) {
            return Err(Error::CertificateFitFailed(format!(
                "a_{n} has imaginary part {:.3e}",
                a.im
            )));
        }
        Ok(if a.re.abs() <= noise {
            (0.0, e)
        } else {
            (a.re, e)
        })
    };
    let pos: Vec<(f64, f64)> = (0..=c.n_max.max(0)).map(clean).collect::<Result<_>>()?;
    let neg: Vec<(f64, f64)> = (0..=(-c.n_min).max(0))
        .map(|n| if n == 0 { Ok((0.0, 0.0)) } else { clean(-n) })
        .collect::<Result<_>>()?;
    let split = |h: &[(f64, f64)]| -> (Vec<f64>, Vec<f64>) {
        (
            h.iter().map(|x| x.0).collect(),
            h.iter().map(|x| x.1).collect(),
        )
    };
    let (pv, pe) = split(&pos);
    let (nv, ne) = split(&neg);
    let (theta, theta_shape) = fit_half(&pv, &pe)?;
    let (beta, beta_shape) = fit_half(&nv, &ne)?;
    Ok(SplitSymbols {
        theta,
        beta,
        theta_shape,
        beta_shape,
    })
}

/// Operator and bookkeeping produced by [`toeplitz_from_function`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionToeplitz {
    pub op: OperatorSpec,
    pub coeffs: LaurentCoeffs,
    pub split: SplitSymbols,
    /// Σ_{n≥1}|a_{−n+1}| (infinite type) or Σ_{n≥1}|a_{−n+1}|e^n (finite type), including |a₀|.
    #[serde(with = "ext_f64")]
    pub literal_sum: f64,
    /// A = Σ|β_i| or B = Σ|β_i|e^{i+1} of the split β.
    #[serde(with = "ext_f64")]
    pub split_sum: f64,
}

/// Laurent window [−window, window] on |z| = r, split and certified for `space`.
pub fn toeplitz_from_function(
    f: &HoloSymbol,
    space: &SpaceSpec,
    r: f64,
    window: usize,
    m: Option<usize>,
) -> Result<FunctionToeplitz> {
    if !space.alpha.is_linear() {
        return Err(Error::UnsupportedSpace(format!(
            "function symbols need α = n, got {}",
            space.describe()
        )));
    }
    let consistent = matches!(
        (f.intended, space.space_type),
        (Intended::Entire, SpaceType::Infinite) | (Intended::Disc, SpaceType::Finite)
    );
    if !consistent {
        return Err(Error::InvalidArgument(format!(
            "{:?} symbol does not match {}",
            f.intended,
            space.describe()
        )));
    }
    let w = window as i64;
    let coeffs = laurent_coeffs(f, r, -w, w, m)?;
    let split = symbol_split(&coeffs)?;
    if space.space_type == SpaceType::Infinite
        && !matches!(split.theta_shape, SplitShape::Zero | SplitShape::Finite)
    {
        return Err(Error::CertificateFitFailed(
            "nonnegative coefficients do not terminate; no certificate for membership in Λ∞(n)"
                .into(),
        ));
    }
    let op = OperatorSpec::toeplitz(space.clone(), split.theta.clone(), split.beta.clone(), None)
        .map_err(|e| match e {
        Error::NotMember { grade } => {
            Error::CertificateFitFailed(format!("θ is not a member at grade {grade}"))
        }
        Error::DualMembershipViolated { n } => {
            Error::CertificateFitFailed(format!("β violates dual membership at n = {n}"))
        }
        other => other,
    })?;
    let a0 = coeffs.get(0).map_or(0.0, |c| c.norm());
    let split_sum = match space.space_type {
        SpaceType::Infinite => ell1_norm_in(space, &split.beta)?.upper(),
        SpaceType::Finite => symbol_seminorm_exponent(space, &split.beta, 1.0)?.upper(),
    };
    let literal_sum = match space.space_type {
        SpaceType::Infinite => a0 + split_sum,
        SpaceType::Finite => a0 * std::f64::consts::E + split_sum,
    };
    Ok(FunctionToeplitz {
        op,
        coeffs,
        split,
        literal_sum,
        split_sum,
    })
}
