//! Gamma-type special functions, the polynomial F_R^(n), the exponent
//! function B(a) and the identities that factor these over compositions.

pub mod gamma;
pub mod lemmas;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::Composition;
use crate::error::{domain, Error, Result};

pub use gamma::{gamma, gamma_r, is_nonpositive_integer, ln_abs_gamma_r, log_gamma, pochhammer, recip_gamma};

/// α ∈ C^n with Σ α_i = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanglandsParameter {
    entries: Vec<Complex64>,
}

impl LanglandsParameter {
    pub const SUM_TOL: f64 = 1e-14;

    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return domain("empty Langlands parameter");
        }
        let sum: Complex64 = entries.iter().sum();
        let scale = entries.iter().map(|a| a.norm()).fold(1.0, f64::max);
        if sum.norm() > Self::SUM_TOL * scale {
            return domain(format!("Langlands parameter must sum to zero, sum = {sum}"));
        }
        Ok(Self { entries })
    }

    /// Tempered parameter (i t_1, ..., i t_{n-1}, -i Σ t).
    pub fn tempered_from(t: &[f64]) -> Self {
        let mut entries: Vec<Complex64> = t.iter().map(|&x| Complex64::new(0.0, x)).collect();
        let last: f64 = -t.iter().sum::<f64>();
        entries.push(Complex64::new(0.0, last));
        Self { entries }
    }

    /// Completes the first n-1 entries with the one that makes the sum vanish.
    pub fn completed(head: &[Complex64]) -> Self {
        let mut entries = head.to_vec();
        let last: Complex64 = -head.iter().sum::<Complex64>();
        entries.push(last);
        Self { entries }
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn is_tempered(&self) -> bool {
        self.entries.iter().all(|a| a.re.abs() <= 1e-14)
    }

    /// α̂_k = α_1 + ... + α_k.
    pub fn hat(&self, k: usize) -> Complex64 {
        self.entries[..k].iter().sum()
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|a| a * f).collect(),
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            entries: perm.iter().map(|&i| self.entries[i]).collect(),
        }
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.entries.iter().map(|a| a.im.abs()).fold(0.0, f64::max)
    }

    /// Σ α_i².
    pub fn square_sum(&self) -> Complex64 {
        self.entries.iter().map(|a| a * a).sum()
    }
}

/// Bitmasks of all j-subsets of {0..n-1}.
pub fn subsets_of_size(n: usize, j: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == j).collect()
}

fn subset_sum(alpha: &[Complex64], mask: u32) -> Complex64 {
    alpha
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, a)| *a)
        .sum()
}

/// (1 - Δ²)^{R/2} on the principal branch.
pub fn fr_factor(delta: Complex64, r: u32) -> Complex64 {
    let base = 1.0 - delta * delta;
    if r % 2 == 0 {
        base.powu(r / 2)
    } else {
        (base.ln() * (r as f64 / 2.0)).exp()
    }
}

/// All differences Σ_K α - Σ_L α over unordered pairs {K, L}, K ≠ L,
/// #K = #L = j, 1 <= j <= n-2.
pub fn fr_differences(alpha: &[Complex64]) -> Vec<Complex64> {
    let n = alpha.len();
    let mut out = Vec::new();
    for j in 1..n.saturating_sub(1) {
        let subs = subsets_of_size(n, j);
        let sums: Vec<Complex64> = subs.iter().map(|&m| subset_sum(alpha, m)).collect();
        for a in 0..subs.len() {
            for b in a + 1..subs.len() {
                out.push(sums[a] - sums[b]);
            }
        }
    }
    out
}

/// F_R^(n)(α) = Π (1 - Δ_{KL}²)^{R/2}.
pub fn f_r_poly(alpha: &LanglandsParameter, r: u32) -> Complex64 {
    fr_differences(alpha.entries())
        .into_iter()
        .fold(Complex64::new(1.0, 0.0), |acc, d| acc * fr_factor(d, r))
}

/// log F_R^(n)(α) as a sum of principal logs.
pub fn ln_f_r_poly(alpha: &[Complex64], r: u32) -> Complex64 {
    fr_differences(alpha)
        .into_iter()
        .map(|d| (1.0 - d * d).ln() * (r as f64 / 2.0))
        .sum()
}

/// B(a), with the ε-exclusion near positive integers enforced.
pub fn bound_b(a: f64, eps: f64) -> Result<f64> {
    if a > 0.0 && (a - a.round()).abs() <= eps {
        return domain(format!("B(a) undefined within {eps} of the integer {}", a.round()));
    }
    Ok(bound_b_ext(a))
}

/// B extended continuously to all reals (0 on a <= 0).
pub fn bound_b_ext(a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let fl = a.floor();
    let frac = a - fl;
    if frac <= 0.5 {
        fl + 2.0 * frac
    } else {
        a.ceil()
    }
}

/// max{a + 1/2, 2a} on a > 0: the exponent saving one expects from the
/// polynomial Stirling factors of |Γ(s+u)Γ(s-u)| on Re s = -a.
pub fn stirling_saving(a: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else {
        (2.0 * a).min(a + 0.5)
    }
}

/// Decomposition of α along a composition.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionedParameter {
    pub base: LanglandsParameter,
    pub composition: Composition,
    pub blocks: Vec<Vec<Complex64>>,
    pub beta: Vec<Complex64>,
}

impl PartitionedParameter {
    /// α_{n̂_{ℓ-1}+j} rebuilt from the blocks and β.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.base.n());
        for (l, block) in self.blocks.iter().enumerate() {
            let shift = self.beta[l] / block.len() as f64;
            out.extend(block.iter().map(|a| a + shift));
        }
        out
    }

    /// |Σ α_i² - Σ_ℓ (|α^(ℓ)|² + β_ℓ²/n_ℓ)|.
    pub fn quadratic_residual(&self) -> f64 {
        let rhs: Complex64 = self
            .blocks
            .iter()
            .zip(&self.beta)
            .map(|(b, beta)| b.iter().map(|x| x * x).sum::<Complex64>() + beta * beta / b.len() as f64)
            .sum();
        (self.base.square_sum() - rhs).norm()
    }
}

pub fn partition_parameter(alpha: &LanglandsParameter, c: &Composition) -> Result<PartitionedParameter> {
    if alpha.n() != c.n() {
        return Err(Error::Domain(format!(
            "parameter of length {} does not match composition {c}",
            alpha.n()
        )));
    }
    let p = c.partials();
    let mut blocks = Vec::with_capacity(c.r());
    let mut beta = Vec::with_capacity(c.r());
    for l in 1..=c.r() {
        let b = alpha.hat(p[l]) - alpha.hat(p[l - 1]);
        let nl = c.parts()[l - 1] as f64;
        blocks.push(alpha.entries()[p[l - 1]..p[l]].iter().map(|a| a - b / nl).collect());
        beta.push(b);
    }
    Ok(PartitionedParameter {
        base: alpha.clone(),
        composition: c.clone(),
        blocks,
        beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn f_r_small_cases() {
        let a2 = LanglandsParameter::tempered_from(&[1.3]);
        assert_eq!(f_r_poly(&a2, 3), c(1.0, 0.0));
        let a0 = LanglandsParameter::new(vec![c(0.0, 0.0); 3]).unwrap();
        assert_eq!(f_r_poly(&a0, 2), c(1.0, 0.0));
        let a = LanglandsParameter::new(vec![c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]).unwrap();
        assert!((f_r_poly(&a, 2) - c(20.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn b_branches() {
        assert_eq!(bound_b(-1.0, 0.01).unwrap(), 0.0);
        assert!((bound_b(0.25, 0.01).unwrap() - 0.5).abs() < 1e-15);
        assert!((bound_b(1.25, 0.01).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(bound_b(0.75, 0.01).unwrap(), 1.0);
        assert!(bound_b(2.001, 0.01).is_err());
    }

    #[test]
    fn partition_example() {
        let alpha = LanglandsParameter::new(vec![c(0.0, 1.0), c(0.0, 2.0), c(0.0, -1.0), c(0.0, -2.0)]).unwrap();
        let comp = Composition::new(vec![2, 2]).unwrap();
        let p = partition_parameter(&alpha, &comp).unwrap();
        assert!((p.beta[0] - c(0.0, 3.0)).norm() < 1e-15);
        assert!((p.beta[1] - c(0.0, -3.0)).norm() < 1e-15);
        assert!((p.blocks[0][0] - c(0.0, -0.5)).norm() < 1e-15);
        assert!((p.blocks[0][1] - c(0.0, 0.5)).norm() < 1e-15);
        assert!((alpha.square_sum() - c(-10.0, 0.0)).norm() < 1e-14);
        assert!(p.quadratic_residual() < 1e-14);
    }

    #[test]
    fn sum_zero_enforced() {
        assert!(LanglandsParameter::new(vec![c(1.0, 0.0), c(0.5, 0.0)]).is_err());
    }
}
