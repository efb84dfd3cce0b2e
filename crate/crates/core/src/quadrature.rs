//! Composite Gauss-Legendre quadrature on real segments and vertical lines.
//!
//! Panels are evaluated in parallel and combined with a fixed pairwise tree,
//! so the floating point result does not depend on the thread count.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights on [-1, 1].
pub fn gauss_legendre(nodes: usize) -> Arc<[(f64, f64)]> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<[(f64, f64)]>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(nodes)
        .or_insert_with(|| {
            let n = NonZeroUsize::new(nodes.max(1)).unwrap();
            let rule = GaussLegendre::new(n);
            let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            pairs.into()
        })
        .clone()
}

/// Sum in a balanced binary tree; order depends only on the slice length.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        2 => v[0] + v[1],
        len => {
            let mid = len / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

pub fn pairwise_sum_real(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        len => {
            let mid = len / 2;
            pairwise_sum_real(&v[..mid]) + pairwise_sum_real(&v[mid..])
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Panel width along the integration variable.
    pub panel_width: f64,
    /// Relative tolerance for refinement and tail checks.
    pub tol: f64,
    /// Absolute floor used when the integral itself is tiny.
    pub abs_floor: f64,
    /// Refinement levels (panel halving) before giving up.
    pub max_refine: usize,
    /// Truncation extensions (x1.5) before giving up.
    pub max_extend: usize,
    /// Evaluate panels on the rayon pool.
    pub parallel: bool,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            nodes: 16,
            panel_width: 1.0,
            tol: 1e-10,
            abs_floor: 1e-300,
            max_refine: 4,
            max_extend: 8,
            parallel: true,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    /// Final truncation half-width (infinite-range integrals) or panel count.
    pub extent: f64,
}

/// Fixed composite rule with `panels` equal panels on [a, b].
pub fn composite<F>(f: &F, a: f64, b: f64, panels: usize, nodes: usize, parallel: bool) -> Complex64
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let rule = gauss_legendre(nodes);
    let h = (b - a) / panels as f64;
    let panel = |k: usize| {
        let lo = a + h * k as f64;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let terms: Vec<Complex64> = rule.iter().map(|&(x, w)| f(mid + half * x) * (w * half)).collect();
        pairwise_sum(&terms)
    };
    let sums: Vec<Complex64> = if parallel && panels > 1 {
        (0..panels).into_par_iter().map(panel).collect()
    } else {
        (0..panels).map(panel).collect()
    };
    pairwise_sum(&sums)
}

fn panel_count(len: f64, width: f64) -> usize {
    ((len / width).ceil() as usize).max(1)
}

/// Adaptive integral over a finite segment: halves the panel width until two
/// successive levels agree to the tolerance.
pub fn integrate_segment<F>(f: &F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Integral>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let mut panels = panel_count(b - a, cfg.panel_width);
    let mut coarse = composite(f, a, b, panels, cfg.nodes, cfg.parallel);
    let mut evaluations = panels * cfg.nodes;
    let mut last_err = f64::INFINITY;
    for _ in 0..=cfg.max_refine {
        panels *= 2;
        let fine = composite(f, a, b, panels, cfg.nodes, cfg.parallel);
        evaluations += panels * cfg.nodes;
        let err = (fine - coarse).norm();
        if err <= cfg.tol * fine.norm().max(cfg.abs_floor) {
            return Ok(Integral {
                value: fine,
                error: err,
                evaluations,
                extent: panels as f64,
            });
        }
        last_err = err / fine.norm().max(cfg.abs_floor);
        coarse = fine;
    }
    Err(Error::Accuracy {
        requested: cfg.tol,
        achieved: last_err,
    })
}

/// ∫_{-∞}^{∞} f(t) dt for integrands decaying away from `center`; the window
/// [center - half_width, center + half_width] grows until the two flanking
/// panels contribute less than tol/10 of the total.
pub fn integrate_real_line<F>(f: &F, center: f64, half_width: f64, cfg: &QuadConfig) -> Result<Integral>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let mut hw = half_width.max(cfg.panel_width);
    let mut evaluations = 0;
    for _ in 0..=cfg.max_extend {
        let body = integrate_segment(f, center - hw, center + hw, cfg)?;
        evaluations += body.evaluations;
        let edge = 2.0 * cfg.panel_width;
        let tail = composite(f, center + hw, center + hw + edge, 2, cfg.nodes, false)
            + composite(f, center - hw - edge, center - hw, 2, cfg.nodes, false);
        evaluations += 4 * cfg.nodes;
        let scale = body.value.norm().max(cfg.abs_floor);
        if tail.norm() <= 0.1 * cfg.tol * scale {
            return Ok(Integral {
                value: body.value,
                error: body.error + tail.norm(),
                evaluations,
                extent: hw,
            });
        }
        hw *= 1.5;
    }
    Err(Error::Accuracy {
        requested: cfg.tol,
        achieved: f64::NAN,
    })
}

/// (1/2πi) ∫_{Re z = sigma} g(z) dz, written as (1/2π) ∫ g(sigma + iτ) dτ.
pub fn vertical_line<G>(g: &G, sigma: f64, center: f64, half_width: f64, cfg: &QuadConfig) -> Result<Integral>
where
    G: Fn(Complex64) -> Complex64 + Sync,
{
    let f = |tau: f64| g(Complex64::new(sigma, tau));
    let mut out = integrate_real_line(&f, center, half_width, cfg)?;
    out.value /= 2.0 * std::f64::consts::PI;
    out.error /= 2.0 * std::f64::consts::PI;
    Ok(out)
}

/// Tensor composite rule on the square [-hw, hw]^2, `panels` per side;
/// rows run in parallel and are reduced by the fixed tree.
pub fn composite_2d<F>(f: &F, hw: f64, panels: usize, nodes: usize, parallel: bool) -> Complex64
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let rule = gauss_legendre(nodes);
    let h = 2.0 * hw / panels as f64;
    let pts: Vec<(f64, f64)> = (0..panels)
        .flat_map(|k| {
            let mid = -hw + h * (k as f64 + 0.5);
            rule.iter().map(move |&(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
        })
        .collect();
    let row = |&(u, wu): &(f64, f64)| {
        let terms: Vec<Complex64> = pts.iter().map(|&(v, wv)| f(u, v) * (wu * wv)).collect();
        pairwise_sum(&terms)
    };
    let rows: Vec<Complex64> = if parallel {
        pts.par_iter().map(row).collect()
    } else {
        pts.iter().map(row).collect()
    };
    pairwise_sum(&rows)
}

/// Truncation half-width for Gamma-type integrands.
pub fn gamma_truncation(max_imag_param: f64) -> f64 {
    30f64.max(10.0 + 3.0 * max_imag_param)
}

/// (1/2πi) ∮ f around a circle, by the trapezoid rule (spectrally accurate
/// for analytic integrands).
pub fn circle_contour<F>(f: &F, center: Complex64, radius: f64, points: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let terms: Vec<Complex64> = (0..points)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
            let e = Complex64::from_polar(radius, theta);
            f(center + e) * e
        })
        .collect();
    pairwise_sum(&terms) / points as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_on_line() {
        let f = |t: f64| Complex64::new((-t * t).exp(), 0.0);
        let r = integrate_real_line(&f, 0.0, 4.0, &QuadConfig::default()).unwrap();
        assert!((r.value.re - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn polynomial_exact() {
        let f = |t: f64| Complex64::new(t.powi(7) + 2.0 * t * t, 0.0);
        let v = composite(&f, -1.0, 2.0, 3, 8, false);
        let exact = (2f64.powi(8) - 1.0) / 8.0 + 2.0 * (8.0 + 1.0) / 3.0;
        assert!((v.re - exact).abs() < 1e-12);
    }

    #[test]
    fn contour_picks_residue() {
        let f = |z: Complex64| 3.0 / (z - 0.2) + z * z;
        let v = circle_contour(&f, Complex64::new(0.2, 0.0), 0.1, 64);
        assert!((v - 3.0).norm() < 1e-13);
    }

    #[test]
    fn plane_gaussian() {
        let f = |u: f64, v: f64| Complex64::new((-(u * u + 2.0 * v * v)).exp(), 0.0);
        let v = composite_2d(&f, 8.0, 16, 16, true);
        let exact = std::f64::consts::PI / 2f64.sqrt();
        assert!((v.re - exact).abs() < 1e-12);
    }

    #[test]
    fn tree_sum_is_order_fixed() {
        let v: Vec<Complex64> = (0..1000).map(|k| Complex64::new(1.0 / (k as f64 + 1.0), 0.0)).collect();
        assert_eq!(pairwise_sum(&v), pairwise_sum(&v.clone()));
    }
}
