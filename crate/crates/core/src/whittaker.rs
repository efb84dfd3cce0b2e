//! Mellin transforms W̃_{n,α}(s) of Whittaker functions: the GL(2) base case,
//! the recursion in n (n = 3, 4), the GL(3) Barnes closed form, shift
//! equations, first residues and the GL(2) Whittaker function itself.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{Composition, ResidueSpec};
use crate::error::{domain, Error, Result};
use crate::quadrature::{circle_contour, composite_2d, gamma_truncation, integrate_real_line, QuadConfig};
use crate::special::{lemmas::in_general_position, log_gamma, pochhammer, LanglandsParameter};

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MellinPoint {
    pub s: Vec<C>,
}

impl MellinPoint {
    pub fn new(s: Vec<C>) -> Self {
        Self { s }
    }

    pub fn real(s: &[f64]) -> Self {
        Self {
            s: s.iter().map(|&x| c(x, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn shifted(&self, sigma: &ShiftVector) -> Self {
        Self {
            s: self.s.iter().zip(&sigma.sigma).map(|(s, &k)| s + k as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftVector {
    pub sigma: Vec<u32>,
}

impl ShiftVector {
    pub fn unit(len: usize, m: usize, delta: u32) -> Self {
        let mut sigma = vec![0; len];
        sigma[m - 1] = delta;
        Self { sigma }
    }

    pub fn weight(&self) -> u32 {
        self.sigma.iter().sum()
    }
}

/// Value, quadrature error estimate and integrand evaluations.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MellinValue {
    pub value: C,
    pub error: f64,
    pub nodes: usize,
}

/// How the n = 4 recursion evaluates its GL(3) inner transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inner {
    Closed,
    Recursive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WhittakerEvaluator {
    pub n: usize,
    pub alpha: LanglandsParameter,
    /// Truncation height Λ; None picks max(30, 10 + 3 max|Im α|).
    pub lambda: Option<f64>,
    pub quad: QuadConfig,
    pub inner: Inner,
}

impl WhittakerEvaluator {
    pub fn new(alpha: LanglandsParameter) -> Result<Self> {
        let n = alpha.n();
        if !(2..=4).contains(&n) {
            return domain(format!("evaluator supports n in 2..=4, got {n}"));
        }
        Ok(Self {
            n,
            alpha,
            lambda: None,
            quad: QuadConfig::default(),
            inner: Inner::Closed,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if tol <= 0.0 || !tol.is_finite() {
            return domain("tolerance must be positive");
        }
        self.quad.tol = tol;
        Ok(self)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.quad.nodes = nodes;
        self
    }

    pub fn truncation(&self) -> f64 {
        self.lambda.unwrap_or_else(|| gamma_truncation(self.alpha.max_abs_imag()))
    }

    pub fn eval(&self, s: &MellinPoint) -> Result<MellinValue> {
        if s.len() + 1 != self.n {
            return domain(format!("MellinPoint of length {} for n = {}", s.len(), self.n));
        }
        match self.n {
            2 => {
                let a = self.alpha.entries();
                Ok(MellinValue {
                    value: ln_mellin_gl2_pair(a[0], a[1], s.s[0])?.exp(),
                    error: 0.0,
                    nodes: 0,
                })
            }
            3 => recursion_gl3(&self.alpha, s, self),
            _ => recursion_gl4(&self.alpha, s, self),
        }
    }
}

fn ln_mellin_gl2_pair(a1: C, a2: C, s: C) -> Result<C> {
    Ok(log_gamma(s + a1)? + log_gamma(s + a2)?)
}

/// W̃_{2,(α,-α)}(s) = Γ(s+α)Γ(s-α).
pub fn mellin_gl2(alpha: C, s: C) -> Result<C> {
    Ok(ln_mellin_gl2_pair(alpha, -alpha, s)?.exp())
}

/// Uncalibrated Barnes form Π Γ(s_1+α_i) Π Γ(s_2-α_i) / Γ(s_1+s_2), as a log.
fn ln_gl3_barnes(a: &[C], s1: C, s2: C) -> Result<C> {
    let mut out = -log_gamma(s1 + s2)?;
    for &ai in a {
        out += log_gamma(s1 + ai)? + log_gamma(s2 - ai)?;
    }
    Ok(out)
}

/// κ_3 Π Γ(s_1+α_i) Π Γ(s_2-α_i) / Γ(s_1+s_2).
pub fn mellin_gl3_closed(alpha: &LanglandsParameter, s: &MellinPoint, kappa3: C) -> Result<C> {
    if alpha.n() != 3 || s.len() != 2 {
        return domain("GL(3) closed form needs n = 3");
    }
    Ok(kappa3 * ln_gl3_barnes(alpha.entries(), s.s[0], s.s[1])?.exp())
}

/// κ_3 from one recursion run at α = 0, s = (1,1).
pub fn calibrate_kappa3(cfg: &QuadConfig) -> Result<C> {
    let alpha = LanglandsParameter::new(vec![c(0.0, 0.0); 3])?;
    let mut ev = WhittakerEvaluator::new(alpha.clone())?;
    ev.quad = cfg.clone();
    let s = MellinPoint::real(&[1.0, 1.0]);
    let rec = ev.eval(&s)?;
    Ok(rec.value / mellin_gl3_closed(&alpha, &s, c(1.0, 0.0))?)
}

/// Nested vertical-line evaluation of W̃_{n,α}(s), n = 3 or 4.
pub fn mellin_recursive(n: usize, alpha: &LanglandsParameter, s: &MellinPoint, tol: f64) -> Result<MellinValue> {
    if n != 3 && n != 4 {
        return domain("recursion implemented for n = 3 and n = 4");
    }
    if alpha.n() != n {
        return domain("parameter length does not match n");
    }
    WhittakerEvaluator::new(alpha.clone())?.with_tol(tol)?.eval(s)
}

fn contour_epsilon(s: &MellinPoint) -> Result<f64> {
    let min = s.s.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return domain("the recursion needs Re(s) > 0");
    }
    Ok(min / 2.0)
}

fn recursion_gl3(alpha: &LanglandsParameter, s: &MellinPoint, ev: &WhittakerEvaluator) -> Result<MellinValue> {
    let eps = contour_epsilon(s)?;
    let a = alpha.entries();
    let a3 = a[2];
    let b1 = a[0] + a3 / 2.0;
    let b2 = a[1] + a3 / 2.0;
    let (s1, s2) = (s.s[0], s.s[1]);
    let outer = log_gamma(s1 + a3)? + log_gamma(s2 - a3)?;
    let f = |tau: f64| -> C {
        let z = c(eps, tau);
        let lg = |w: C| log_gamma(w).unwrap_or(c(f64::NEG_INFINITY, 0.0));
        (outer + lg(s1 - z - a3 / 2.0) + lg(s2 - z + a3 / 2.0) + lg(z + b1) + lg(z + b2)).exp()
    };
    let center = -(a3.im / 2.0);
    let r = integrate_real_line(&f, center, ev.truncation(), &ev.quad)?;
    let scale = 1.0 / (2.0 * std::f64::consts::PI);
    Ok(MellinValue {
        value: r.value * scale,
        error: r.error * scale,
        nodes: r.evaluations,
    })
}

fn recursion_gl4(alpha: &LanglandsParameter, s: &MellinPoint, ev: &WhittakerEvaluator) -> Result<MellinValue> {
    let eps = contour_epsilon(s)?;
    let a = alpha.entries();
    let a4 = a[3];
    let beta = LanglandsParameter::new(a[..3].iter().map(|x| x + a4 / 3.0).collect())?;
    let s_ = &s.s;
    let inner_ev = match ev.inner {
        Inner::Recursive => {
            let mut e = WhittakerEvaluator::new(beta.clone())?;
            e.quad = ev.quad.clone().with_tol(ev.quad.tol * 0.1).sequential();
            e.lambda = ev.lambda;
            Some(e)
        }
        Inner::Closed => None,
    };
    let lg = |w: C| log_gamma(w).unwrap_or(c(f64::NEG_INFINITY, 0.0));
    let f = |t1: f64, t2: f64| -> C {
        let z = [c(0.0, 0.0), c(eps, t1), c(eps, t2), c(0.0, 0.0)];
        let mut l = c(0.0, 0.0);
        for j in 1..=3 {
            let jf = j as f64;
            l += lg(s_[j - 1] - z[j - 1] + (4.0 - jf) * a4 / 3.0);
            l += lg(s_[j - 1] - z[j] - jf * a4 / 3.0);
        }
        let zp = MellinPoint::new(vec![z[1], z[2]]);
        match &inner_ev {
            None => (l + ln_gl3_barnes(beta.entries(), z[1], z[2]).unwrap_or(c(f64::NEG_INFINITY, 0.0))).exp(),
            Some(e) => l.exp() * e.eval(&zp).map(|v| v.value).unwrap_or(c(f64::NAN, 0.0)),
        }
    };
    let hw = plane_truncation(&f, ev.truncation(), ev.quad.tol);
    let mut panels = ((2.0 * hw / ev.quad.panel_width).ceil() as usize).max(1);
    let mut coarse = composite_2d(&f, hw, panels, ev.quad.nodes, ev.quad.parallel);
    let mut nodes = (panels * ev.quad.nodes).pow(2);
    let scale = 1.0 / (2.0 * std::f64::consts::PI).powi(2);
    let mut last = f64::INFINITY;
    for _ in 0..ev.quad.max_refine {
        panels *= 2;
        let fine = composite_2d(&f, hw, panels, ev.quad.nodes, ev.quad.parallel);
        nodes += (panels * ev.quad.nodes).pow(2);
        let err = (fine - coarse).norm();
        if !fine.re.is_finite() || !fine.im.is_finite() {
            return Err(Error::Accuracy {
                requested: ev.quad.tol,
                achieved: f64::NAN,
            });
        }
        if err <= ev.quad.tol * fine.norm() {
            return Ok(MellinValue {
                value: fine * scale,
                error: err * scale,
                nodes,
            });
        }
        last = err / fine.norm();
        coarse = fine;
    }
    Err(Error::Accuracy {
        requested: ev.quad.tol,
        achieved: last,
    })
}

/// Smallest square half-width from 8, 12, 18, ... (capped at `max_hw`) on
/// whose boundary the integrand, times the perimeter, stays below tol/10 of
/// its value at the origin.
fn plane_truncation<F>(f: &F, max_hw: f64, tol: f64) -> f64
where
    F: Fn(f64, f64) -> C,
{
    let centre = f(0.0, 0.0).norm();
    let mut hw = 8.0f64;
    while hw < max_hw {
        let steps = (8.0 * hw) as usize;
        let mut edge = 0.0f64;
        for k in 0..=steps {
            let t = -hw + 2.0 * hw * k as f64 / steps as f64;
            for (u, v) in [(t, hw), (t, -hw), (hw, t), (-hw, t)] {
                edge = edge.max(f(u, v).norm());
            }
        }
        if edge * 8.0 * hw <= 0.1 * tol * centre {
            return hw;
        }
        hw *= 1.5;
    }
    max_hw
}

/// Outcome of a shift-equation check.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftReport {
    pub n: usize,
    pub m: usize,
    pub delta: u32,
    pub lhs: C,
    pub rhs: C,
    pub rel_error: f64,
    /// δ C(n, m).
    pub degree_target: u32,
    /// (deg P_i, |Σ_i|) for each term on the right.
    pub terms: Vec<(u32, u32)>,
    pub degree_ok: bool,
}

fn binom(n: usize, k: usize) -> u32 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1)) as u32
}

/// B_m(s_m, α) W̃(s) against Σ P_i W̃(s + Σ_i) for n = 2 and n = 3 (the
/// latter through the Barnes form, with P = (s_1+s_2)_δ and Σ = δ e_m).
pub fn shift_identity_check(n: usize, m: usize, delta: u32, alpha: &LanglandsParameter, s: &MellinPoint) -> Result<ShiftReport> {
    if !(1..n).contains(&m) {
        return domain("need 1 <= m <= n-1");
    }
    if alpha.n() != n || s.len() + 1 != n {
        return domain("sizes do not match n");
    }
    let a = alpha.entries();
    let sm = s.s[m - 1];
    let b: C = crate::special::subsets_of_size(n, m)
        .into_iter()
        .map(|mask| {
            let ak: C = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).sum();
            pochhammer(sm + ak, delta)
        })
        .product();
    let shifted = s.shifted(&ShiftVector::unit(n - 1, m, delta));
    let (lhs, rhs, p_deg) = match n {
        2 => {
            let w = ln_mellin_gl2_pair(a[0], a[1], s.s[0])?.exp();
            let ws = ln_mellin_gl2_pair(a[0], a[1], shifted.s[0])?.exp();
            (b * w, ws, 0)
        }
        3 => {
            let one = c(1.0, 0.0);
            let w = mellin_gl3_closed(alpha, s, one)?;
            let ws = mellin_gl3_closed(alpha, &shifted, one)?;
            (b * w, pochhammer(s.s[0] + s.s[1], delta) * ws, delta)
        }
        _ => return Err(Error::NotImplemented(format!("shift identity for n = {n}"))),
    };
    let target = delta * binom(n, m);
    let terms = vec![(p_deg, delta)];
    let degree_ok = terms.iter().all(|&(p, w)| p + 2 * w == target);
    Ok(ShiftReport {
        n,
        m,
        delta,
        lhs,
        rhs,
        rel_error: (lhs - rhs).norm() / rhs.norm(),
        degree_target: target,
        terms,
        degree_ok,
    })
}

/// Location of the pole s_m = -α̂_m - δ.
pub fn residue_location(alpha: &LanglandsParameter, m: usize, delta: u32) -> C {
    -alpha.hat(m) - delta as f64
}

fn residue_index(spec: &ResidueSpec, n: usize) -> Result<(usize, u32)> {
    let comp: &Composition = &spec.composition;
    if comp.n() != n || comp.r() != 2 || spec.deltas.len() != 1 {
        return domain("first residues need a composition of length 2 and one δ");
    }
    let delta = spec.deltas[0];
    if delta > 3 {
        return domain("δ above 3 is outside the implemented range");
    }
    Ok((comp.parts()[0], delta))
}

/// Residue of W̃_{n,α} at s_m = -α̂_m - δ, where (m, n-m) is the composition
/// of `spec` and δ its single entry. `s_rest` holds the other variables.
///
/// The value is assembled as
/// ((-δ)_δ)^{-1} Π_{i<=m<j} Γ(α_j-α_i-δ) · P · W̃_{m,β}(s') W̃_{n-m,γ}(s''),
/// with P = 1 for n = 2 and P = (s_other + α_{m'} - δ)_δ for n = 3.
pub fn residue_formula(n: usize, spec: &ResidueSpec, alpha: &LanglandsParameter, s_rest: &[C]) -> Result<C> {
    let (m, delta) = residue_index(spec, n)?;
    if alpha.n() != n || s_rest.len() + 2 != n {
        return domain("sizes do not match n");
    }
    let a = alpha.entries();
    if !in_general_position(a, 1e-9) {
        return Err(Error::Degenerate("α is not in general position".into()));
    }
    let d = delta as f64;
    let mut ln = -pochhammer(c(-d, 0.0), delta).ln();
    for i in 0..m {
        for j in m..n {
            ln += log_gamma(a[j] - a[i] - d)?;
        }
    }
    match (n, m) {
        (2, _) => Ok(ln.exp()),
        (3, 1) => {
            let s2 = s_rest[0];
            let g = [a[1] + a[0] / 2.0, a[2] + a[0] / 2.0];
            let s2p = s2 + a[0] / 2.0;
            ln += ln_mellin_gl2_pair(g[0], g[1], s2p)?;
            Ok(ln.exp() * pochhammer(s2 - a[0] - d, delta))
        }
        (3, 2) => {
            let s1 = s_rest[0];
            let ah = a[0] + a[1];
            let bt = [a[0] - ah / 2.0, a[1] - ah / 2.0];
            let s1p = s1 + ah / 2.0;
            ln += ln_mellin_gl2_pair(bt[0], bt[1], s1p)?;
            Ok(ln.exp() * pochhammer(s1 + a[2] - d, delta))
        }
        _ => Err(Error::NotImplemented(format!("residues for n = {n}"))),
    }
}

/// (1/2πi)∮ W̃ around the pole on a circle of the given radius; W̃ is the
/// GL(2) formula or the uncalibrated GL(3) Barnes form.
pub fn residue_contour(n: usize, spec: &ResidueSpec, alpha: &LanglandsParameter, s_rest: &[C], radius: f64) -> Result<C> {
    let (m, delta) = residue_index(spec, n)?;
    if alpha.n() != n || s_rest.len() + 2 != n {
        return domain("sizes do not match n");
    }
    let pole = residue_location(alpha, m, delta);
    let a = alpha.entries().to_vec();
    let rest = s_rest.to_vec();
    let f = move |z: C| -> C {
        let v = match n {
            2 => ln_mellin_gl2_pair(a[0], a[1], z),
            _ if m == 1 => ln_gl3_barnes(&a, z, rest[0]),
            _ => ln_gl3_barnes(&a, rest[0], z),
        };
        v.map(|l| l.exp()).unwrap_or(c(f64::NAN, 0.0))
    };
    Ok(circle_contour(&f, pole, radius, 128))
}

/// W_{2,α}(y) = (1/2) (1/2πi) ∫_{Re s = 2b} y^{1/2} (πy)^{-s} W̃_{2,α/2}(s/2) ds.
pub fn whittaker_value(alpha: &LanglandsParameter, y: f64, b: f64, cfg: &QuadConfig) -> Result<MellinValue> {
    if alpha.n() != 2 {
        return Err(Error::NotImplemented("Whittaker values only for n = 2".into()));
    }
    if !(y > 0.0) {
        return domain("y must be positive");
    }
    if !(b > 0.0) {
        return domain("b must be positive");
    }
    let a = alpha.entries();
    let (h1, h2) = (a[0] / 2.0, a[1] / 2.0);
    let ln_pre = 0.5 * y.ln();
    let ln_piy = (std::f64::consts::PI * y).ln();
    let f = |tau: f64| -> C {
        let s = c(2.0 * b, tau);
        let g = ln_mellin_gl2_pair(h1, h2, s / 2.0).unwrap_or(c(f64::NEG_INFINITY, 0.0));
        (ln_pre - s * ln_piy + g).exp()
    };
    let hw = 2.0 * gamma_truncation(alpha.max_abs_imag());
    let r = integrate_real_line(&f, 0.0, hw, cfg)?;
    let scale = 0.5 / (2.0 * std::f64::consts::PI);
    Ok(MellinValue {
        value: r.value * scale,
        error: r.error * scale,
        nodes: r.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl2_values() {
        assert!((mellin_gl2(c(0.0, 0.0), c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        let v = mellin_gl2(c(0.5, 0.0), c(1.0, 0.0)).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).norm() < 1e-14);
        assert!(mellin_gl2(c(0.5, 0.0), c(-0.5, 0.0)).is_err());
    }

    #[test]
    fn gl3_recursion_matches_barnes() {
        let alpha = LanglandsParameter::tempered_from(&[0.7, -1.9]);
        let s = MellinPoint::new(vec![c(0.75, 0.3), c(0.75, -1.2)]);
        let rec = mellin_recursive(3, &alpha, &s, 1e-10).unwrap();
        let closed = mellin_gl3_closed(&alpha, &s, c(1.0, 0.0)).unwrap();
        assert!((rec.value / closed - 1.0).norm() < 1e-8, "{} vs {}", rec.value, closed);
    }

    #[test]
    fn whittaker_half_is_exponential() {
        let alpha = LanglandsParameter::new(vec![c(0.5, 0.0), c(-0.5, 0.0)]).unwrap();
        for y in [0.3, 1.0] {
            let w = whittaker_value(&alpha, y, 0.5, &QuadConfig::default()).unwrap();
            let want = (-2.0 * std::f64::consts::PI * y).exp();
            assert!((w.value.re - want).abs() < 1e-9 * want, "{y}: {} vs {want}", w.value);
        }
    }

    #[test]
    fn gl2_residue_contour() {
        let alpha = LanglandsParameter::tempered_from(&[0.4]);
        for delta in 0..=3 {
            let spec = ResidueSpec::new(Composition::new(vec![1, 1]).unwrap(), vec![delta]).unwrap();
            let f = residue_formula(2, &spec, &alpha, &[]).unwrap();
            let o = residue_contour(2, &spec, &alpha, &[], 0.1).unwrap();
            assert!((f - o).norm() < 1e-8 * f.norm(), "δ={delta}: {f} vs {o}");
        }
    }

    #[test]
    fn gl3_residue_contour() {
        let alpha = LanglandsParameter::tempered_from(&[0.4, 1.1]);
        for (m, rest) in [(1, c(0.6, 0.2)), (2, c(0.8, -0.5))] {
            for delta in 0..=3 {
                let comp = Composition::new(vec![m, 3 - m]).unwrap();
                let spec = ResidueSpec::new(comp, vec![delta]).unwrap();
                let f = residue_formula(3, &spec, &alpha, &[rest]).unwrap();
                let o = residue_contour(3, &spec, &alpha, &[rest], 0.1).unwrap();
                assert!((f - o).norm() < 1e-8 * f.norm(), "m={m} δ={delta}: {f} vs {o}");
            }
        }
    }
}
