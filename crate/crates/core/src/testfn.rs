//! Spectral test functions p^#, h, the inverse transform p(y) with its
//! contour-shift decomposition, the integrals I_TR and the main term, and
//! log-log scaling fits in T.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{Composition, ContourShift, ResidueSpec};
use crate::error::{domain, Error, Result};
use crate::quadrature::{composite_2d, integrate_segment, QuadConfig};
use crate::special::{bound_b_ext, fr_differences, ln_f_r_poly, log_gamma, stirling_saving, LanglandsParameter};
use crate::whittaker::residue_formula;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionParams {
    pub t: f64,
    pub r: u32,
    pub n: usize,
}

impl TestFunctionParams {
    pub fn new(t: f64, r: u32, n: usize) -> Result<Self> {
        if !(t >= 1.0) || !t.is_finite() {
            return domain("T must be at least 1");
        }
        if r < 1 {
            return domain("R must be at least 1");
        }
        if n < 2 {
            return domain("n must be at least 2");
        }
        Ok(Self { t, r, n })
    }
}

/// The two Gaussian widths that occur: e^{Σα²/(2T²)} on p^# and h, and
/// e^{Σα²/(T²/2)} on p(y), its residue terms and I_TR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaussianWidth {
    TwoTSquared,
    HalfTSquared,
}

impl GaussianWidth {
    /// log of the Gaussian factor at Σα² = `sq`.
    pub fn ln_factor(self, sq: C, t: f64) -> C {
        match self {
            Self::TwoTSquared => sq / (2.0 * t * t),
            Self::HalfTSquared => sq * (2.0 / (t * t)),
        }
    }
}

fn ordered_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |j| (0..n).filter(move |&k| k != j).map(move |k| (j, k)))
}

/// log p^#_{T,R}(α).
pub fn ln_p_sharp(alpha: &LanglandsParameter, params: &TestFunctionParams) -> Result<C> {
    if alpha.n() != params.n {
        return domain("parameter length does not match n");
    }
    let a = alpha.entries();
    let half: Vec<C> = a.iter().map(|x| x / 2.0).collect();
    let mut out = GaussianWidth::TwoTSquared.ln_factor(alpha.square_sum(), params.t);
    out += ln_f_r_poly(&half, params.r);
    let shift = 1.0 + 2.0 * params.r as f64;
    for (j, k) in ordered_pairs(a.len()) {
        out += log_gamma((shift + a[j] - a[k]) / 4.0)?;
    }
    Ok(out)
}

/// p^#_{T,R}(α) = e^{Σα²/(2T²)} F_R(α/2) Π_{j≠k} Γ((1+2R+α_j-α_k)/4).
pub fn p_sharp(alpha: &LanglandsParameter, params: &TestFunctionParams) -> Result<C> {
    Ok(ln_p_sharp(alpha, params)?.exp())
}

/// log of Π_{j<k} |Γ((1+α_j-α_k)/2)|² for tempered α.
fn ln_h_denominator(a: &[C]) -> Result<f64> {
    let mut out = 0.0;
    for j in 0..a.len() {
        for k in j + 1..a.len() {
            out += 2.0 * log_gamma((1.0 + a[j] - a[k]) / 2.0)?.re;
        }
    }
    Ok(out)
}

/// h_{T,R}(α) = |p^#|² / Π_{j≠k} Γ((1+α_j-α_k)/2), tempered α only.
pub fn h_value(alpha: &LanglandsParameter, params: &TestFunctionParams) -> Result<f64> {
    if !alpha.is_tempered() {
        return domain("h is only defined here on tempered parameters");
    }
    let ln = 2.0 * ln_p_sharp(alpha, params)?.re - ln_h_denominator(alpha.entries())?;
    Ok(ln.exp())
}

/// log Γ_R(z) with Γ_R(z) = Γ((1/2+R+z)/2)/Γ(z); None at the zeros.
fn ln_gamma_r(z: C, r: u32) -> Option<C> {
    let num = log_gamma((c(0.5 + r as f64, 0.0) + z) / 2.0).ok()?;
    let den = log_gamma(z).ok()?;
    Some(num - den)
}

/// Half-width of the t-window outside which e^{-4t²/T²} < tol/1e4.
fn gaussian_window(t_param: f64, tol: f64) -> f64 {
    0.5 * t_param * (1e4 / tol).ln().sqrt()
}

/// Distance from the line Re s = -a to the nearest pole line Re s = -k.
fn pole_distance(a: f64) -> f64 {
    if a <= 0.0 {
        -a
    } else {
        (a - a.round()).abs()
    }
}

/// Integrate over [lo, hi] split at `cuts`, with fine panels within 4 of a
/// cut and `coarse` panels elsewhere.
fn graded_integral<F>(f: &F, lo: f64, hi: f64, cuts: &[f64], fine: f64, coarse: f64, cfg: &QuadConfig) -> Result<(C, usize)>
where
    F: Fn(f64) -> C + Sync,
{
    let mut pts = vec![lo, hi];
    for &x in cuts {
        pts.extend([x - 4.0, x + 4.0]);
    }
    let mut pts: Vec<f64> = pts.into_iter().filter(|&x| x >= lo && x <= hi).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut total = c(0.0, 0.0);
    let mut evals = 0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let near = cuts.iter().any(|&x| (mid - x).abs() <= 4.0);
        let mut seg_cfg = cfg.clone();
        seg_cfg.panel_width = if near { fine } else { coarse };
        let r = integrate_segment(f, a, b, &seg_cfg)?;
        total += r.value;
        evals += r.evaluations;
    }
    Ok((total, evals))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TestFnValue {
    pub value: C,
    pub evaluations: usize,
}

fn nan_guard(v: C, tol: f64) -> Result<C> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Accuracy {
            requested: tol,
            achieved: f64::NAN,
        })
    }
}

/// p_{T,R}(y) (a < 0, contour Re s = -a > 0) or the shifted term p_{T,R}(y; -a)
/// (a > 0), for n = 2:
/// (1/2π) ∫dt e^{-4t²/T²} Γ_R(2it)Γ_R(-2it) ∫dτ y^{1/2} (πy)^{-2s} Γ(s+it)Γ(s-it).
pub fn p_y(y: &[f64], params: &TestFunctionParams, shift: &ContourShift, cfg: &QuadConfig) -> Result<TestFnValue> {
    if params.n != 2 {
        return Err(Error::NotImplemented(format!("p(y) for n = {}", params.n)));
    }
    if y.len() != 1 || shift.n() != 2 {
        return domain("n = 2 needs one y and one shift");
    }
    if !(y[0] > 0.0) {
        return domain("y must be positive");
    }
    let a = shift.values[0];
    if pole_distance(a) < 1e-3 {
        return domain("the shifted contour must avoid the pole lines");
    }
    let sigma = -a;
    let y0 = y[0];
    let ln_piy = (std::f64::consts::PI * y0).ln();
    let ln_sqrt_y = 0.5 * y0.ln();
    let tsq = params.t * params.t;
    let r = params.r;
    let fine = pole_distance(a).min(0.5);
    let mut inner_cfg = cfg.clone().sequential();
    inner_cfg.tol = cfg.tol * 0.1;
    let outer = |t: f64| -> C {
        let u = c(0.0, t);
        let (Some(g1), Some(g2)) = (ln_gamma_r(2.0 * u, r), ln_gamma_r(-2.0 * u, r)) else {
            return c(0.0, 0.0);
        };
        let pre = -4.0 * t * t / tsq + g1 + g2 + ln_sqrt_y;
        let inner = |tau: f64| -> C {
            let s = c(sigma, tau);
            match (log_gamma(s + u), log_gamma(s - u)) {
                (Ok(x), Ok(z)) => (pre + x + z - 2.0 * s * ln_piy).exp(),
                _ => c(f64::NAN, 0.0),
            }
        };
        let ta = t.abs();
        graded_integral(&inner, -ta - 20.0, ta + 20.0, &[-ta, ta], fine, 2.0, &inner_cfg)
            .map(|(v, _)| v)
            .unwrap_or(c(f64::NAN, 0.0))
    };
    let l = gaussian_window(params.t, cfg.tol);
    let mut out_cfg = cfg.clone();
    out_cfg.panel_width = 0.5;
    let r = integrate_segment(&outer, 0.0, l, &out_cfg)?;
    // even in t
    let value = nan_guard(r.value * 2.0 / (2.0 * std::f64::consts::PI), cfg.tol)?;
    Ok(TestFnValue {
        value,
        evaluations: r.evaluations,
    })
}

/// The residue term for C = (1,1) and a single δ (n = 2):
/// ∫dt e^{-4t²/T²} Γ_R(2u)Γ_R(-2u) y^{1/2} (πy)^{2(u+δ)} Res_{s=-u-δ} W̃_{2,(u,-u)}(s),
/// u = it. Zero when the composition is not admissible for `shift`.
pub fn residue_term(y: &[f64], params: &TestFunctionParams, shift: &ContourShift, spec: &ResidueSpec, cfg: &QuadConfig) -> Result<TestFnValue> {
    if params.n != 2 {
        return Err(Error::NotImplemented(format!("residue terms for n = {}", params.n)));
    }
    if spec.composition.parts() != [1, 1] || shift.n() != 2 || y.len() != 1 {
        return domain("n = 2 residue terms need C = (1,1), one y and one shift");
    }
    if !spec.is_admissible(shift) {
        return Ok(TestFnValue {
            value: c(0.0, 0.0),
            evaluations: 0,
        });
    }
    let a = shift.values[0];
    let delta = spec.deltas[0];
    if delta as f64 > a.floor() {
        return domain(format!("δ = {delta} exceeds ⌊a⌋ for a = {a}"));
    }
    let y0 = y[0];
    let ln_piy = (std::f64::consts::PI * y0).ln();
    let ln_sqrt_y = 0.5 * y0.ln();
    let tsq = params.t * params.t;
    let r = params.r;
    let f = |t: f64| -> C {
        let u = c(0.0, t);
        let (Some(g1), Some(g2)) = (ln_gamma_r(2.0 * u, r), ln_gamma_r(-2.0 * u, r)) else {
            return c(0.0, 0.0);
        };
        let alpha = LanglandsParameter::completed(&[u]);
        match residue_formula(2, spec, &alpha, &[]) {
            Ok(res) => {
                let ln = -4.0 * t * t / tsq + g1 + g2 + ln_sqrt_y + 2.0 * (u + delta as f64) * ln_piy;
                ln.exp() * res
            }
            Err(_) => c(f64::NAN, 0.0),
        }
    };
    let l = gaussian_window(params.t, cfg.tol);
    let mut seg = cfg.clone();
    seg.panel_width = 0.5;
    let r = integrate_segment(&f, -l, l, &seg)?;
    Ok(TestFnValue {
        value: nan_guard(r.value, cfg.tol)?,
        evaluations: r.evaluations,
    })
}

/// Three-term identity p(y) = p(y; -a) + κ Σ_δ residue_term(y, δ) over a y grid.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub t: f64,
    pub r: u32,
    pub a: f64,
    pub b: f64,
    pub y: Vec<f64>,
    pub unshifted: Vec<C>,
    pub shifted: Vec<C>,
    pub residues: Vec<C>,
    pub kappa: C,
    pub max_rel_residual: f64,
}

pub fn verify_decomposition(params: &TestFunctionParams, a: f64, b: f64, y_grid: &[f64], cfg: &QuadConfig) -> Result<DecompositionReport> {
    if !(b > 0.0) {
        return domain("b must be positive");
    }
    let comp = Composition::new(vec![1, 1])?;
    let shifted_line = ContourShift::new(vec![a])?;
    let start = ContourShift::new(vec![-b])?;
    let mut unshifted = Vec::new();
    let mut shifted = Vec::new();
    let mut residues = Vec::new();
    for &y in y_grid {
        unshifted.push(p_y(&[y], params, &start, cfg)?.value);
        shifted.push(p_y(&[y], params, &shifted_line, cfg)?.value);
        let mut sum = c(0.0, 0.0);
        if a > 0.0 {
            for delta in 0..=a.floor() as u32 {
                let spec = ResidueSpec::new(comp.clone(), vec![delta])?;
                sum += residue_term(&[y], params, &shifted_line, &spec, cfg)?.value;
            }
        }
        residues.push(sum);
    }
    let num: C = residues.iter().zip(unshifted.iter().zip(&shifted)).map(|(r, (p, q))| r.conj() * (p - q)).sum();
    let den: f64 = residues.iter().map(|r| r.norm_sqr()).sum();
    let kappa = if den > 0.0 { num / den } else { c(0.0, 0.0) };
    let max_rel_residual = (0..y_grid.len())
        .map(|i| {
            let resid = (unshifted[i] - shifted[i] - kappa * residues[i]).norm();
            let scale = unshifted[i].norm().max(shifted[i].norm()).max((kappa * residues[i]).norm());
            resid / scale
        })
        .fold(0.0, f64::max);
    Ok(DecompositionReport {
        t: params.t,
        r: params.r,
        a,
        b,
        y: y_grid.to_vec(),
        unshifted,
        shifted,
        residues,
        kappa,
        max_rel_residual,
    })
}

/// I_{T,R}^{(2)}(-a) =
/// 4 ∫_0^∞ dt e^{-4t²/T²} |Γ_R(2it)|² ∫_0^∞ dτ |Γ(-a+i(τ+t)) Γ(-a+i(τ-t))|.
pub fn i_tr(m: usize, shift: &ContourShift, params: &TestFunctionParams, cfg: &QuadConfig) -> Result<f64> {
    if m != 2 {
        return Err(Error::NotImplemented(format!("I_TR for m = {m}")));
    }
    if shift.n() != 2 {
        return domain("m = 2 needs one shift entry");
    }
    let a = shift.values[0];
    if pole_distance(a) < 1e-3 {
        return domain("the shifted contour must avoid the pole lines");
    }
    let tsq = params.t * params.t;
    let r = params.r;
    let fine = pole_distance(a).min(0.5);
    let mut inner_cfg = cfg.clone().sequential();
    inner_cfg.tol = cfg.tol * 0.1;
    let outer = |t: f64| -> C {
        let Some(g) = ln_gamma_r(c(0.0, 2.0 * t), r) else {
            return c(0.0, 0.0);
        };
        let pre = -4.0 * t * t / tsq + 2.0 * g.re;
        let inner = |tau: f64| -> C {
            match (log_gamma(c(-a, tau + t)), log_gamma(c(-a, tau - t))) {
                (Ok(x), Ok(z)) => c((pre + x.re + z.re).exp(), 0.0),
                _ => c(f64::NAN, 0.0),
            }
        };
        graded_integral(&inner, 0.0, t + 20.0, &[t], fine, 2.0, &inner_cfg)
            .map(|(v, _)| v)
            .unwrap_or(c(f64::NAN, 0.0))
    };
    let l = gaussian_window(params.t, cfg.tol);
    let coarse = (params.t / 16.0).max(0.5);
    let mut out_cfg = cfg.clone();
    let mut total = c(0.0, 0.0);
    for (lo, hi, w) in [(0.0, l.min(4.0), 0.5), (l.min(4.0), l, coarse)] {
        if hi > lo {
            out_cfg.panel_width = w;
            total += integrate_segment(&outer, lo, hi, &out_cfg)?.value;
        }
    }
    let v = nan_guard(total, cfg.tol)?.re * 4.0;
    if !(v > 0.0) {
        return Err(Error::Accuracy {
            requested: cfg.tol,
            achieved: f64::NAN,
        });
    }
    Ok(v)
}

/// ∫ |p^#(α)|² / Π_{j≠k} Γ((α_j-α_k)/2) dα over tempered α, n = 2 or 3
/// (the constant d_n omitted).
pub fn main_term(params: &TestFunctionParams, cfg: &QuadConfig) -> Result<f64> {
    let tp = params.t;
    let integrand = |tau: &[f64]| -> f64 {
        let alpha = LanglandsParameter::tempered_from(tau);
        let a = alpha.entries();
        let mut den = 0.0;
        for j in 0..a.len() {
            for k in j + 1..a.len() {
                match log_gamma((a[j] - a[k]) / 2.0) {
                    Ok(l) => den += 2.0 * l.re,
                    Err(_) => return 0.0,
                }
            }
        }
        match ln_p_sharp(&alpha, params) {
            Ok(l) => (2.0 * l.re - den).exp(),
            Err(_) => f64::NAN,
        }
    };
    match params.n {
        2 => {
            let f = |t: f64| c(integrand(&[t]), 0.0);
            let l = tp * (1e4 / cfg.tol).ln().sqrt() / 2f64.sqrt();
            let mut seg = cfg.clone();
            seg.panel_width = (tp / 8.0).max(0.5);
            let near = integrate_segment(&f, 0.0, 4.0f64.min(l), &cfg.clone().with_tol(cfg.tol))?;
            let far = integrate_segment(&f, 4.0f64.min(l), l, &seg)?;
            Ok(2.0 * nan_guard(near.value + far.value, cfg.tol)?.re)
        }
        3 => {
            let f = |u: f64, v: f64| c(integrand(&[u, v]), 0.0);
            let hw = 5.0 * tp;
            let panels = ((2.0 * hw / (tp / 8.0)).ceil() as usize).max(2);
            let v = composite_2d(&f, hw, panels, cfg.nodes, cfg.parallel);
            Ok(nan_guard(v, cfg.tol)?.re)
        }
        n => Err(Error::NotImplemented(format!("main term for n = {n}"))),
    }
}

/// Predicted growth exponent of the main term, R(2D(n) + n(n-1)) + n - 1.
pub fn main_term_exponent(n: usize, r: u32) -> Result<f64> {
    let d = crate::combinatorics::degree_d(n)? as f64;
    Ok(r as f64 * (2.0 * d + (n * (n - 1)) as f64) + (n - 1) as f64)
}

/// Quantity whose T-scaling is fitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Measure {
    ITr { a: f64 },
    MainTerm { n: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingFit {
    pub measure: Measure,
    pub r: u32,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub predicted: f64,
    /// |slope - predicted|.
    pub residual: f64,
    /// Largest deviation of log(value) from the fitted line.
    pub fit_residual: f64,
    /// For I_TR: R + 3/2 - min(2a, a+1/2), the exponent the Stirling factors give.
    pub stirling_predicted: Option<f64>,
}

/// Least-squares slope and intercept of log v against log T.
pub fn log_log_fit(ts: &[f64], vs: &[f64]) -> Result<(f64, f64, f64)> {
    if ts.len() < 2 || ts.len() != vs.len() {
        return Err(Error::Fit("need matching grids with at least two points".into()));
    }
    if vs.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("non-positive measured value".into()));
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let worst = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok((slope, intercept, worst))
}

pub fn fit_scaling(measure: Measure, r: u32, t_grid: &[f64], cfg: &QuadConfig) -> Result<ScalingFit> {
    if t_grid.len() < 4 {
        return Err(Error::Fit("at least four T values are needed".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Fit("T grid must be strictly increasing".into()));
    }
    let (n, predicted, stirling_predicted) = match measure {
        Measure::ITr { a } => (
            2,
            r as f64 + 1.5 - bound_b_ext(a),
            Some(r as f64 + 1.5 - stirling_saving(a)),
        ),
        Measure::MainTerm { n } => (n, main_term_exponent(n, r)?, None),
    };
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let params = TestFunctionParams::new(t, r, n)?;
        values.push(match measure {
            Measure::ITr { a } => i_tr(2, &ContourShift::new(vec![a])?, &params, cfg)?,
            Measure::MainTerm { .. } => main_term(&params, cfg)?,
        });
    }
    let (slope, intercept, fit_residual) = log_log_fit(t_grid, &values)?;
    Ok(ScalingFit {
        measure,
        r,
        t_grid: t_grid.to_vec(),
        values,
        slope,
        intercept,
        predicted,
        residual: (slope - predicted).abs(),
        fit_residual,
        stirling_predicted,
    })
}

/// Number of factors in F_R^(n), for reference in reports.
pub fn f_r_factor_count(n: usize) -> usize {
    fr_differences(&vec![c(0.0, 0.0); n]).len()
}
