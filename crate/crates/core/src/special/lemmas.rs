//! Checks of the auxiliary identities and inequalities used in the
//! exponent bookkeeping: B(a) comparisons, Γ_R and F_R factorizations over
//! a composition, and the exact β-sum identity.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::gamma::{gamma, gamma_r, ln_abs_gamma_r, log_gamma};
use super::{bound_b_ext, fr_factor, ln_f_r_poly, partition_parameter, subsets_of_size, LanglandsParameter};
use crate::combinatorics::{degree_d, Composition, Q};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct MaxSimplifyReport {
    pub points: usize,
    pub violations: usize,
    pub max_gap: f64,
}

/// max{0, 2(⌈a⌉-a)-1} - ⌈a⌉ against -⌈a⌉ on [⌈a⌉-1/2, ⌈a⌉) and
/// -⌊a⌋ - 2(a-⌊a⌋) on (⌊a⌋, ⌊a⌋+1/2].
pub fn verify_max_simplify(grid: &[f64]) -> MaxSimplifyReport {
    let mut rep = MaxSimplifyReport {
        points: 0,
        violations: 0,
        max_gap: 0.0,
    };
    for &a in grid {
        if a == a.round() {
            continue;
        }
        rep.points += 1;
        let ce = a.ceil();
        let lhs = (2.0 * (ce - a) - 1.0).max(0.0) - ce;
        let fl = a.floor();
        let rhs = if a - fl <= 0.5 { -fl - 2.0 * (a - fl) } else { -ce };
        let gap = lhs - rhs;
        rep.max_gap = rep.max_gap.max(gap);
        if gap > 1e-12 {
            rep.violations += 1;
        }
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueShiftReport {
    pub samples: usize,
    pub violations: usize,
    pub min_slack: f64,
    pub worst_case: Option<String>,
}

/// Evaluates both sides of the B-inequality governing how a residue at
/// s_m = -α̂_m - δ_m redistributes the shifts.
pub fn residue_shift_slack(a: &[f64], m: usize, delta: u32) -> f64 {
    let n = a.len() + 1;
    let am = a[m - 1] - delta as f64;
    let left: f64 = (1..m).map(|j| bound_b_ext(a[j - 1] - j as f64 / m as f64 * am)).sum::<f64>()
        + (1..n - m)
            .map(|j| bound_b_ext(a[m + j - 1] - (n - m - j) as f64 / (n - m) as f64 * am))
            .sum::<f64>();
    let right = a.iter().map(|&x| bound_b_ext(x)).sum::<f64>()
        - (n as f64 - 2.0) / 2.0 * (am + 1.0)
        - bound_b_ext(a[m - 1]);
    left - right
}

pub fn verify_residue_shift<R: Rng>(rng: &mut R, samples: usize, n_max: usize, eps: f64) -> ResidueShiftReport {
    let mut rep = ResidueShiftReport {
        samples: 0,
        violations: 0,
        min_slack: f64::INFINITY,
        worst_case: None,
    };
    while rep.samples < samples {
        let n = rng.gen_range(3..=n_max);
        let a: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.01..3.0)).collect();
        if a.iter().any(|x| (x - x.round()).abs() < eps) {
            continue;
        }
        let m = rng.gen_range(1..n);
        let delta = rng.gen_range(0..=a[m - 1].floor() as u32);
        if a[m - 1] - delta as f64 <= 0.0 {
            continue;
        }
        rep.samples += 1;
        let s = residue_shift_slack(&a, m, delta);
        if s < rep.min_slack {
            rep.min_slack = s;
            rep.worst_case = Some(format!("a={a:?}, m={m}, delta={delta}"));
        }
        if s < -1e-12 {
            rep.violations += 1;
        }
    }
    rep
}

/// Integer coefficient vector of Σ_K α - Σ_L α, sign-normalized.
fn form_vector(n: usize, k: u32, l: u32) -> Vec<i8> {
    let mut v: Vec<i8> = (0..n)
        .map(|i| (k >> i & 1) as i8 - (l >> i & 1) as i8)
        .collect();
    if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Multiset of the linear forms entering F^(n), restricted to index set
/// `offset..offset+size` inside an ambient length `n`.
fn fr_forms(n: usize, offset: usize, size: usize) -> HashMap<Vec<i8>, usize> {
    let mut out = HashMap::new();
    for j in 1..size.saturating_sub(1) {
        let subs = subsets_of_size(size, j);
        for a in 0..subs.len() {
            for b in a + 1..subs.len() {
                let v = form_vector(n, subs[a] << offset, subs[b] << offset);
                *out.entry(v).or_insert(0) += 1;
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaDecompReport {
    pub composition: String,
    /// |Σ log|Γ_R| over i≠j minus the block/cross factorization|.
    pub log_modulus_error: f64,
    /// Relative error of the complex products.
    pub product_error: f64,
    /// Same for the two-block form with n/(k(n-k)) α̂_k (only when r = 2).
    pub two_block_error: Option<f64>,
    pub fr_blocks_embedded: bool,
    pub fr_remaining: usize,
    pub fr_expected_remaining: u128,
    /// Relative error of F^(n) / Π F^(n_ℓ)(α^(ℓ)) against the leftover factors.
    pub fr_numeric_error: f64,
    pub quadratic_residual: f64,
}

impl GammaDecompReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.log_modulus_error <= tol
            && self.product_error <= tol
            && self.two_block_error.is_none_or(|e| e <= tol)
            && self.fr_blocks_embedded
            && self.fr_remaining as u128 == self.fr_expected_remaining
            && self.fr_numeric_error <= tol
            && self.quadratic_residual <= tol
    }
}

/// Checks that every j-subset sum of α is distinct (for all j).
pub fn in_general_position(alpha: &[Complex64], tol: f64) -> bool {
    let n = alpha.len();
    for j in 1..n {
        let sums: Vec<Complex64> = subsets_of_size(n, j)
            .into_iter()
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| alpha[i]).sum())
            .collect();
        for a in 0..sums.len() {
            for b in a + 1..sums.len() {
                if (sums[a] - sums[b]).norm() < tol {
                    return false;
                }
            }
        }
    }
    true
}

pub fn verify_gamma_decompositions(alpha: &LanglandsParameter, c: &Composition, r: u32) -> Result<GammaDecompReport> {
    if !in_general_position(alpha.entries(), 1e-9) {
        return Err(Error::Degenerate("alpha is not in general position".into()));
    }
    let n = alpha.n();
    let a = alpha.entries();
    let part = partition_parameter(alpha, c)?;

    let mut lhs_log = 0.0;
    let mut lhs = Complex64::new(1.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                lhs_log += ln_abs_gamma_r(a[i] - a[j], r);
                lhs *= gamma_r(a[i] - a[j], r);
            }
        }
    }
    let mut rhs_log = 0.0;
    let mut rhs = Complex64::new(1.0, 0.0);
    for block in &part.blocks {
        for i in 0..block.len() {
            for j in 0..block.len() {
                if i != j {
                    rhs_log += ln_abs_gamma_r(block[i] - block[j], r);
                    rhs *= gamma_r(block[i] - block[j], r);
                }
            }
        }
    }
    let parts = c.parts();
    for k in 0..c.r() {
        for m in k + 1..c.r() {
            let shift = part.beta[k] / parts[k] as f64 - part.beta[m] / parts[m] as f64;
            for x in &part.blocks[k] {
                for y in &part.blocks[m] {
                    let z = x - y + shift;
                    rhs_log += ln_abs_gamma_r(z, r) + ln_abs_gamma_r(-z, r);
                    rhs *= gamma_r(z, r) * gamma_r(-z, r);
                }
            }
        }
    }
    let two_block_error = if c.r() == 2 {
        let k = parts[0];
        let coef = n as f64 / (k * (n - k)) as f64;
        let hat = alpha.hat(k);
        let (bs, gs) = (&part.blocks[0], &part.blocks[1]);
        let mut v = Complex64::new(1.0, 0.0);
        for block in [bs, gs] {
            for i in 0..block.len() {
                for j in 0..block.len() {
                    if i != j {
                        v *= gamma_r(block[i] - block[j], r);
                    }
                }
            }
        }
        for b in bs {
            for g in gs {
                v *= gamma_r(b - g + hat * coef, r) * gamma_r(g - b - hat * coef, r);
            }
        }
        Some((v - lhs).norm() / lhs.norm())
    } else {
        None
    };

    let mut forms = fr_forms(n, 0, n);
    let p = c.partials();
    let mut embedded = true;
    let mut expected = degree_d(n).unwrap_or(0);
    let mut block_log = Complex64::new(0.0, 0.0);
    for (l, &nl) in parts.iter().enumerate() {
        if nl == 1 {
            continue;
        }
        expected -= degree_d(nl)?;
        for (v, cnt) in fr_forms(n, p[l], nl) {
            match forms.get_mut(&v) {
                Some(have) if *have >= cnt => *have -= cnt,
                _ => embedded = false,
            }
        }
        block_log += ln_f_r_poly(&part.blocks[l], r);
    }
    let mut leftover_log = Complex64::new(0.0, 0.0);
    let mut remaining = 0;
    for (v, cnt) in &forms {
        remaining += cnt;
        let d: Complex64 = v.iter().zip(a).map(|(&c, x)| x * c as f64).sum();
        leftover_log += fr_factor(d, r).ln() * *cnt as f64;
    }
    let full = ln_f_r_poly(a, r);
    let diff = full - block_log - leftover_log;
    let turns = (diff.im / std::f64::consts::TAU).round();
    let fr_numeric_error = (Complex64::new(diff.re, diff.im - turns * std::f64::consts::TAU).exp() - 1.0).norm();

    Ok(GammaDecompReport {
        composition: c.to_string(),
        log_modulus_error: (lhs_log - rhs_log).abs(),
        product_error: (lhs - rhs).norm() / lhs.norm(),
        two_block_error,
        fr_blocks_embedded: embedded,
        fr_remaining: remaining,
        fr_expected_remaining: expected,
        fr_numeric_error,
        quadratic_residual: part.quadratic_residual(),
    })
}

/// Both sides of Σ_{k<m} Σ_i Σ_j (β_k/n_k - β_m/n_m) = Σ_j (n_j + n_{j+1}) β̂_j.
pub fn extra_gamma_sum(beta: &[Q], c: &Composition) -> Result<(Q, Q)> {
    if beta.len() != c.r() {
        return Err(Error::Domain("beta length must equal the number of parts".into()));
    }
    if beta.iter().sum::<Q>() != Q::from_integer(0) {
        return Err(Error::Domain("beta must sum to zero".into()));
    }
    let parts: Vec<i64> = c.parts().iter().map(|&p| p as i64).collect();
    let mut lhs = Q::from_integer(0);
    for k in 0..parts.len() {
        for m in k + 1..parts.len() {
            let term = beta[k] / parts[k] - beta[m] / parts[m];
            lhs += term * (parts[k] * parts[m]);
        }
    }
    let mut rhs = Q::from_integer(0);
    let mut hat = Q::from_integer(0);
    for j in 0..parts.len() - 1 {
        hat += beta[j];
        rhs += hat * (parts[j] + parts[j + 1]);
    }
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, Serialize)]
pub struct NoPolesReport {
    pub points: usize,
    /// Largest |f(z_k + η)| over the grid; stays O(1) when no poles survive.
    pub max_modulus: f64,
    /// Largest ratio |f(z_k + η_small)| / |f(z_k + η_large)|; a surviving
    /// simple pole would make this ~η_large/η_small.
    pub max_blowup: f64,
}

/// Γ_R(β+z) Γ_R(-β-z) Γ(-β-z-δ) near the points z = -β + k, |k| < R.
pub fn verify_no_poles(beta: Complex64, delta: i32, r: u32) -> NoPolesReport {
    let f = |z: Complex64| -> f64 {
        let w = beta + z;
        let g = match log_gamma(-w - delta as f64) {
            Ok(l) => l.exp(),
            Err(_) => return f64::INFINITY,
        };
        (gamma_r(w, r) * gamma_r(-w, r) * g).norm()
    };
    let mut rep = NoPolesReport {
        points: 0,
        max_modulus: 0.0,
        max_blowup: 0.0,
    };
    for k in -(r as i32) + 1..r as i32 {
        let z0 = -beta + k as f64;
        let near = f(z0 + Complex64::new(1e-7, 1e-7));
        let far = f(z0 + Complex64::new(1e-3, 1e-3));
        rep.points += 1;
        rep.max_modulus = rep.max_modulus.max(near);
        if far > 0.0 {
            rep.max_blowup = rep.max_blowup.max(near / far);
        }
    }
    rep
}

/// Log-log slope of |Γ_R(w)Γ_R(-w)Γ(-w-δ)| in Im w, compared with R - Re w - δ.
pub fn residue_growth_slope(sigma: f64, delta: i32, r: u32) -> (f64, f64) {
    let val = |t: f64| {
        let w = Complex64::new(sigma, t);
        let g = gamma(-w - delta as f64).unwrap_or(Complex64::new(f64::NAN, 0.0));
        (gamma_r(w, r) * gamma_r(-w, r) * g).norm().ln()
    };
    let (t1, t2) = (200.0, 400.0);
    let slope = (val(t2) - val(t1)) / (t2 / t1).ln();
    (slope, r as f64 - sigma - delta as f64)
}

/// Number of m-subsets K of {1..n} with #(K ∩ {1..m}) not in {m-1, m},
/// against C(n,m) - m(n-m) - 1.
pub fn extra_poly_count(n: usize, m: usize) -> (usize, usize) {
    let mask_m: u32 = (1 << m) - 1;
    let count = subsets_of_size(n, m)
        .into_iter()
        .filter(|k| {
            let inter = (k & mask_m).count_ones() as usize;
            inter + 1 != m && inter != m
        })
        .count();
    let binom = num_integer::binomial(n, m);
    (count, binom - m * (n - m) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_simplify_examples() {
        let r = verify_max_simplify(&[0.3, 0.8]);
        assert_eq!(r.violations, 0);
        let lhs = (2.0f64 * (1.0 - 0.3) - 1.0).max(0.0) - 1.0;
        assert!((lhs + 0.6).abs() < 1e-15);
    }

    #[test]
    fn residue_shift_example() {
        assert!(residue_shift_slack(&[0.75, 0.75, 0.75], 2, 0) >= 0.0);
    }

    #[test]
    fn extra_gamma_small() {
        let c = Composition::new(vec![1, 2, 3]).unwrap();
        let beta = [Q::new(1, 3), Q::new(-5, 7), Q::new(8, 21)];
        let (l, r) = extra_gamma_sum(&beta, &c).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn extra_poly_counts() {
        for n in 2..8 {
            for m in 1..n {
                let (a, b) = extra_poly_count(n, m);
                assert_eq!(a, b);
            }
        }
    }
}
