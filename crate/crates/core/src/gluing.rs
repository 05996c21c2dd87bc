//! Radial model of the gluing estimates: radius bands, the cutoff, model
//! curvature and error profiles, weighted norms by quadrature in `ln ρ`, and
//! power-law fits of norms against the scale parameter.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use serde::Serialize;

use crate::error::{Error, Result};

const INNER_EXP: f64 = 5.0 / 6.0;
const OUTER_EXP: f64 = 3.0 / 4.0;
const GL_DEGREE: usize = 16;
const MIN_PANELS: usize = 64;
const MAX_PANELS: usize = 1 << 16;
const QUAD_RTOL: f64 = 1e-10;

/// Scale parameter `t ∈ (0, 1]` and neck scale `ζ > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GluingParams {
    pub t: f64,
    pub zeta: f64,
}

impl GluingParams {
    pub fn new(t: f64, zeta: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidGluingParams(format!("t = {t} is not in (0, 1]")));
        }
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidGluingParams(format!("zeta = {zeta} must be positive")));
        }
        Ok(GluingParams { t, zeta })
    }

    pub fn with_t(t: f64) -> Result<Self> {
        Self::new(t, 1.0)
    }

    /// `2 t^{4/5} ≤ t^{3/4}`, which holds only for `t ≤ 2⁻²⁰`.
    pub fn smallness_condition_holds(&self) -> bool {
        2.0 * self.t.powf(0.8) <= self.t.powf(0.75)
    }
}

/// Band edges `t < t^{5/6}ζ < t^{3/4}ζ < ζ ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadiusBands {
    pub t: f64,
    pub inner: f64,
    pub outer: f64,
    pub zeta: f64,
    pub one: f64,
}

pub fn radius_bands(gp: GluingParams) -> Result<RadiusBands> {
    let b = RadiusBands {
        t: gp.t,
        inner: gp.t.powf(INNER_EXP) * gp.zeta,
        outer: gp.t.powf(OUTER_EXP) * gp.zeta,
        zeta: gp.zeta,
        one: 1.0,
    };
    if !(b.t < b.inner && b.inner < b.outer && b.outer < b.zeta && b.zeta <= b.one) {
        return Err(Error::InvalidGluingParams(format!(
            "bands out of order: t = {}, t^(5/6)ζ = {}, t^(3/4)ζ = {}, ζ = {}",
            b.t, b.inner, b.outer, b.zeta
        )));
    }
    Ok(b)
}

fn smoothstep(x: f64) -> f64 {
    let s = ((x - OUTER_EXP) / (INNER_EXP - OUTER_EXP)).clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

fn smoothstep_slope(x: f64) -> f64 {
    let w = INNER_EXP - OUTER_EXP;
    let s = (x - OUTER_EXP) / w;
    if !(0.0..=1.0).contains(&s) {
        return 0.0;
    }
    30.0 * s * s * (1.0 - s) * (1.0 - s) / w
}

fn check_radius(gp: GluingParams, rho: f64) -> Result<()> {
    if !(rho >= gp.t && rho <= 1.0) {
        return Err(Error::RadiusOutOfRange { rho, lo: gp.t, hi: 1.0 });
    }
    Ok(())
}

/// `χ(ln(ρ/ζ) / ln t)`: 1 on `ρ ≤ t^{5/6}ζ`, 0 on `ρ ≥ t^{3/4}ζ`.
pub fn cutoff_chi(gp: GluingParams, rho: f64) -> Result<f64> {
    radius_bands(gp)?;
    check_radius(gp, rho)?;
    Ok(smoothstep((rho / gp.zeta).ln() / gp.t.ln()))
}

/// `dχ/dρ`.
pub fn cutoff_chi_derivative(gp: GluingParams, rho: f64) -> Result<f64> {
    radius_bands(gp)?;
    check_radius(gp, rho)?;
    let x = (rho / gp.zeta).ln() / gp.t.ln();
    Ok(smoothstep_slope(x) / (rho * gp.t.ln()))
}

/// Sub-interval of `[lo, hi]` with endpoint membership flags.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x > self.lo || (self.lo_closed && x == self.lo)) && (x < self.hi || (self.hi_closed && x == self.hi))
    }
}

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Piece {
    pub interval: Interval,
    pub f: RadialFn,
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Piece").field("interval", &self.interval).finish_non_exhaustive()
    }
}

/// Piecewise scalar function of `ρ` whose pieces partition `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pieces: Vec<Piece>,
}

impl RadialProfile {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput("profile needs at least one piece".into()));
        }
        for w in pieces.windows(2) {
            let (a, b) = (w[0].interval, w[1].interval);
            if a.hi != b.lo || a.hi_closed == b.lo_closed {
                return Err(Error::InvalidInput(format!(
                    "pieces do not partition: [{}, {}] then [{}, {}]",
                    a.lo, a.hi, b.lo, b.hi
                )));
            }
        }
        Ok(RadialProfile { pieces })
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Result<Self> {
        Self::new(vec![Piece {
            interval: Interval::closed(lo, hi),
            f: Arc::new(move |_| c),
        }])
    }

    pub fn from_fn(lo: f64, hi: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::new(vec![Piece {
            interval: Interval::closed(lo, hi),
            f: Arc::new(f),
        }])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.pieces[0].interval.lo, self.pieces[self.pieces.len() - 1].interval.hi)
    }

    pub fn eval(&self, rho: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        self.pieces
            .iter()
            .find(|p| p.interval.contains(rho))
            .map(|p| (p.f)(rho))
            .ok_or(Error::RadiusOutOfRange { rho, lo, hi })
    }
}

// Inner band closed at both ends, open middle band, closed outer band.
fn three_bands(gp: GluingParams, f0: RadialFn, f1: RadialFn, f2: RadialFn) -> Result<RadialProfile> {
    let b = radius_bands(gp)?;
    RadialProfile::new(vec![
        Piece {
            interval: Interval::closed(b.t, b.inner),
            f: f0,
        },
        Piece {
            interval: Interval::open(b.inner, b.outer),
            f: f1,
        },
        Piece {
            interval: Interval::closed(b.outer, 1.0),
            f: f2,
        },
    ])
}

/// `|π₇F|`: `t⁶ρ⁻⁸ + 1` on the open interpolation band, 0 elsewhere.
pub fn error_profile(gp: GluingParams) -> Result<RadialProfile> {
    let t6 = gp.t.powi(6);
    three_bands(
        gp,
        Arc::new(|_| 0.0),
        Arc::new(move |r: f64| t6 * r.powi(-8) + 1.0),
        Arc::new(|_| 0.0),
    )
}

/// `|F|`: `t⁶ρ⁻⁸`, then `t⁶ρ⁻⁸ + 1`, then 1.
pub fn curvature_profile(gp: GluingParams) -> Result<RadialProfile> {
    let t6 = gp.t.powi(6);
    three_bands(
        gp,
        Arc::new(move |r: f64| t6 * r.powi(-8)),
        Arc::new(move |r: f64| t6 * r.powi(-8) + 1.0),
        Arc::new(|_| 1.0),
    )
}

/// `|dχ/dρ|`, supported in the interpolation band.
pub fn dchi_profile(gp: GluingParams) -> Result<RadialProfile> {
    let lt = gp.t.ln();
    let zeta = gp.zeta;
    three_bands(
        gp,
        Arc::new(|_| 0.0),
        Arc::new(move |r: f64| (smoothstep_slope((r / zeta).ln() / lt) / (r * lt)).abs()),
        Arc::new(|_| 0.0),
    )
}

/// Exponent `p`, derivative count and weight `δ` of `L^p_{k,δ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedNormSpec {
    pub p: u32,
    pub derivative_count: u32,
    pub delta: f64,
}

impl WeightedNormSpec {
    pub fn new(p: u32, delta: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("norm exponent p must be ≥ 1".into()));
        }
        Ok(WeightedNormSpec {
            p,
            derivative_count: 0,
            delta,
        })
    }

    /// Unweighted `L^p`: the weight `ρ^{−pδ−8}` cancels at `δ = −8/p`.
    pub fn plain(p: u32) -> Result<Self> {
        Self::new(p, -8.0 / p as f64)
    }
}

fn integrate_panels(
    rule: &GaussLegendre,
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    panels: usize,
) -> std::result::Result<f64, String> {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mut bad = None;
        let v = rule.integrate(lo, lo + h, |u| {
            let y = g(u);
            if !y.is_finite() && bad.is_none() {
                bad = Some(u.exp());
            }
            y
        });
        if let Some(rho) = bad {
            return Err(format!("integrand is not finite at ρ = {rho:e}"));
        }
        total += v;
    }
    Ok(total)
}

/// `∫ f(ρ)^p ρ^{−pδ−8} ρ⁷ dρ` over one piece, with a fixed number of panels in `ln ρ`.
fn piece_integral(piece: &Piece, spec: WeightedNormSpec, panels: usize) -> Result<f64> {
    let rule = GaussLegendre::new(GL_DEGREE).expect("degree ≥ 2");
    let p = spec.p as i32;
    let w = -(spec.p as f64) * spec.delta;
    let f = piece.f.clone();
    let g = move |u: f64| {
        let rho = u.exp();
        (f(rho).abs()).powi(p) * (w * u).exp()
    };
    let (a, b) = (piece.interval.lo.ln(), piece.interval.hi.ln());
    if b <= a {
        return Ok(0.0);
    }
    integrate_panels(&rule, &g, a, b, panels).map_err(|detail| Error::NonIntegrable {
        lo: piece.interval.lo,
        hi: piece.interval.hi,
        detail,
    })
}

/// Radial norm with a fixed panel count per piece.
pub fn radial_norm_with_panels(profile: &RadialProfile, spec: WeightedNormSpec, panels: usize) -> Result<f64> {
    let mut total = 0.0;
    for piece in profile.pieces() {
        total += piece_integral(piece, spec, panels.max(1))?;
    }
    Ok(total.powf(1.0 / spec.p as f64))
}

/// `(∫ f^p ρ^{−pδ} ρ^{−8} ρ⁷ dρ)^{1/p}`, doubling panels from 64 until converged.
pub fn radial_norm(profile: &RadialProfile, spec: WeightedNormSpec) -> Result<f64> {
    if spec.p == 0 {
        return Err(Error::InvalidInput("norm exponent p must be ≥ 1".into()));
    }
    let mut total = 0.0;
    for piece in profile.pieces() {
        let mut panels = MIN_PANELS;
        let mut prev = piece_integral(piece, spec, panels)?;
        loop {
            panels *= 2;
            let next = piece_integral(piece, spec, panels)?;
            if (next - prev).abs() <= QUAD_RTOL * next.abs() || next == 0.0 {
                total += next;
                break;
            }
            if panels >= MAX_PANELS {
                return Err(Error::NonIntegrable {
                    lo: piece.interval.lo,
                    hi: piece.interval.hi,
                    detail: format!("quadrature did not converge ({prev:e} vs {next:e})"),
                });
            }
            prev = next;
        }
    }
    if !total.is_finite() {
        let (lo, hi) = profile.domain();
        return Err(Error::NonIntegrable {
            lo,
            hi,
            detail: "integral overflowed".into(),
        });
    }
    Ok(total.powf(1.0 / spec.p as f64))
}

/// Plain `L⁴` norm of the error profile.
pub fn error_l4(gp: GluingParams) -> Result<f64> {
    radial_norm(&error_profile(gp)?, WeightedNormSpec::plain(4)?)
}

/// Plain `L⁸` norm of the curvature profile.
pub fn curvature_l8(gp: GluingParams) -> Result<f64> {
    radial_norm(&curvature_profile(gp)?, WeightedNormSpec::plain(8)?)
}

/// Plain `L⁸` norm of `dχ`.
pub fn dchi_l8(gp: GluingParams) -> Result<f64> {
    radial_norm(&dchi_profile(gp)?, WeightedNormSpec::plain(8)?)
}

/// `‖π₇F‖_{L⁴} + t^{4/3} ‖F‖_{L⁸}`.
pub fn approx_error_bound(gp: GluingParams) -> Result<f64> {
    Ok(error_l4(gp)? + gp.t.powf(4.0 / 3.0) * curvature_l8(gp)?)
}

/// Least-squares fit `log y = exponent · log x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Power-law fit of positive data.
pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::DegenerateGrid(format!(
            "need at least 3 paired samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if let Some(bad) = xs.iter().zip(ys).find(|(x, y)| !(**x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::DegenerateGrid(format!("non-positive sample ({}, {})", bad.0, bad.1)));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateGrid("abscissae are all equal".into()));
    }
    let exponent = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(FitResult {
        exponent,
        intercept: my - exponent * mx,
        r_squared,
    })
}

/// Fit of `t ↦ norm_fn(t)` over a grid of at least 5 points spanning 2 decades.
pub fn scaling_fit(norm_fn: impl Fn(f64) -> Result<f64>, t_grid: &[f64]) -> Result<FitResult> {
    if t_grid.len() < 5 {
        return Err(Error::DegenerateGrid(format!("{} points, need at least 5", t_grid.len())));
    }
    let (lo, hi) = t_grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    if !(lo > 0.0) || (hi / lo).log10() < 2.0 - 1e-9 {
        return Err(Error::DegenerateGrid(format!("grid [{lo:e}, {hi:e}] spans less than 2 decades")));
    }
    let ys = t_grid.iter().map(|&t| norm_fn(t)).collect::<Result<Vec<_>>>()?;
    power_law_fit(t_grid, &ys)
}

/// `samples` points log-spaced on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || samples < 2 {
        return Err(Error::DegenerateGrid(format!("cannot grid [{lo}, {hi}] with {samples} samples")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..samples)
        .map(|k| (a + (b - a) * k as f64 / (samples - 1) as f64).exp())
        .collect())
}

/// Quantities available to a t-scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanNorm {
    L4Err,
    L8Curv,
    L8Dchi,
    Bound,
}

impl FromStr for ScanNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l4err" => Ok(ScanNorm::L4Err),
            "l8curv" => Ok(ScanNorm::L8Curv),
            "l8dchi" => Ok(ScanNorm::L8Dchi),
            "bound" => Ok(ScanNorm::Bound),
            _ => Err(Error::InvalidInput(format!("unknown norm {s:?}"))),
        }
    }
}

impl fmt::Display for ScanNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanNorm::L4Err => "l4err",
            ScanNorm::L8Curv => "l8curv",
            ScanNorm::L8Dchi => "l8dchi",
            ScanNorm::Bound => "bound",
        })
    }
}

impl ScanNorm {
    pub fn evaluate(self, gp: GluingParams) -> Result<f64> {
        match self {
            ScanNorm::L4Err => error_l4(gp),
            ScanNorm::L8Curv => curvature_l8(gp),
            ScanNorm::L8Dchi => dchi_l8(gp),
            ScanNorm::Bound => approx_error_bound(gp),
        }
    }

    /// Expected exponent and tolerance; the bound is one-sided.
    pub fn expected(self) -> (f64, f64) {
        match self {
            ScanNorm::L4Err => (1.0, 0.1),
            ScanNorm::L8Curv => (-1.0, 0.1),
            ScanNorm::L8Dchi => (-7.0 / 8.0, 0.05),
            ScanNorm::Bound => (1.0 / 3.0, 0.05),
        }
    }

    /// Whether the fit abscissa is `|ln t|` rather than `t`.
    pub fn against_log_t(self) -> bool {
        self == ScanNorm::L8Dchi
    }

    pub fn passes(self, exponent: f64) -> bool {
        let (e, tol) = self.expected();
        match self {
            ScanNorm::Bound => exponent >= e - tol,
            _ => (exponent - e).abs() <= tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanPoint {
    pub t: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub norm: ScanNorm,
    pub abscissa: &'static str,
    pub points: Vec<ScanPoint>,
    pub exponent: f64,
    pub r_squared: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn gluing_scan(norm: ScanNorm, t_min: f64, t_max: f64, samples: usize) -> Result<ScanResult> {
    let grid = log_grid(t_min, t_max, samples)?;
    let eval = |t: f64| norm.evaluate(GluingParams::with_t(t)?);
    let fit = if norm.against_log_t() {
        let ys = grid.iter().map(|&t| eval(t)).collect::<Result<Vec<_>>>()?;
        let xs: Vec<f64> = grid.iter().map(|t| t.ln().abs()).collect();
        power_law_fit(&xs, &ys)?
    } else {
        scaling_fit(eval, &grid)?
    };
    let points = grid
        .iter()
        .map(|&t| Ok(ScanPoint { t, value: eval(t)? }))
        .collect::<Result<Vec<_>>>()?;
    let (expected, tolerance) = norm.expected();
    Ok(ScanResult {
        norm,
        abscissa: if norm.against_log_t() { "|ln t|" } else { "t" },
        points,
        exponent: fit.exponent,
        r_squared: fit.r_squared,
        expected,
        tolerance,
        pass: norm.passes(fit.exponent),
    })
}
