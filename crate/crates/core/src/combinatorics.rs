//! Compositions of n and the integer bookkeeping attached to them.

use std::collections::HashSet;
use std::fmt;

use num_integer::binomial;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub type Q = Ratio<i64>;

/// Ordered tuple of positive parts summing to `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Composition {
    parts: Vec<usize>,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|&p| p == 0) {
            return domain(format!("composition parts must be positive, got {parts:?}"));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    /// Partial sum n̂_k with n̂_0 = 0 and n̂_r = n.
    pub fn partial(&self, k: usize) -> usize {
        self.parts[..k].iter().sum()
    }

    pub fn partials(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.r() + 1);
        let mut acc = 0;
        out.push(0);
        for &p in &self.parts {
            acc += p;
            out.push(acc);
        }
        out
    }

    /// Parts in reverse order.
    pub fn reversed(&self) -> Self {
        let mut parts = self.parts.clone();
        parts.reverse();
        Self { parts }
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// A residue datum: a composition together with one shift per boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueSpec {
    pub composition: Composition,
    pub deltas: Vec<u32>,
}

impl ResidueSpec {
    pub fn new(composition: Composition, deltas: Vec<u32>) -> Result<Self> {
        if deltas.len() + 1 != composition.r() {
            return domain(format!(
                "need {} shifts for {composition}, got {}",
                composition.r() - 1,
                deltas.len()
            ));
        }
        Ok(Self { composition, deltas })
    }

    pub fn is_admissible(&self, a: &ContourShift) -> bool {
        is_admissible(&self.composition, a)
    }
}

/// Real line offsets (a_1, ..., a_{n-1}).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourShift {
    pub values: Vec<f64>,
}

impl ContourShift {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return domain("contour shift entries must be finite");
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len() + 1
    }

    /// True when every entry stays more than `eps` away from the integers.
    pub fn avoids_integers(&self, eps: f64) -> bool {
        self.values.iter().all(|v| (v - v.round()).abs() > eps)
    }
}

fn push_compositions(rest: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Composition>) {
    if len == 0 {
        if rest == 0 {
            out.push(Composition { parts: cur.clone() });
        }
        return;
    }
    if rest < len {
        return;
    }
    for first in 1..=rest - (len - 1) {
        cur.push(first);
        push_compositions(rest - first, len - 1, cur, out);
        cur.pop();
    }
}

/// Every composition of `n` with at least `min_length` parts, grouped by
/// length and lexicographic within each length.
pub fn enumerate_compositions(n: usize, min_length: usize) -> Result<Vec<Composition>> {
    if n < 1 {
        return domain("n must be at least 1");
    }
    if min_length < 1 {
        return domain("min_length must be at least 1");
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    for len in min_length..=n {
        push_compositions(n, len, &mut cur, &mut out);
    }
    Ok(out)
}

fn is_admissible(c: &Composition, a: &ContourShift) -> bool {
    let p = c.partials();
    (1..c.r()).all(|i| a.values[p[i] - 1] > 0.0)
}

/// Compositions with r >= 2 whose boundary indices n̂_i all carry a_{n̂_i} > 0.
pub fn admissible_compositions(a: &ContourShift) -> Vec<Composition> {
    let n = a.n();
    if n < 2 {
        return Vec::new();
    }
    enumerate_compositions(n, 2)
        .unwrap_or_default()
        .into_iter()
        .filter(|c| is_admissible(c, a))
        .collect()
}

/// Both closed forms for D(n).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeForms {
    pub pair_sum: u128,
    pub central: u128,
}

pub fn degree_forms(n: usize) -> Result<DegreeForms> {
    if n < 2 {
        return domain("D(n) needs n >= 2");
    }
    let n128 = n as u128;
    let pair_sum = (1..=n.saturating_sub(2))
        .map(|j| {
            let c = binomial(n128, j as u128);
            c * (c - 1) / 2
        })
        .sum();
    let central = binomial(2 * n128, n128) / 2 - n128 * (n128 - 1) / 2 - (1u128 << (n - 1));
    Ok(DegreeForms { pair_sum, central })
}

/// D(n), the degree of F_1^(n).
pub fn degree_d(n: usize) -> Result<u128> {
    let f = degree_forms(n)?;
    debug_assert_eq!(f.pair_sum, f.central);
    Ok(f.pair_sum)
}

/// Φ(n_1,...,n_r) = ½ Σ_k (n_k + n_{k+1}) (n - n̂_k) n̂_k.
pub fn phi(c: &Composition) -> Result<Q> {
    if c.r() < 2 {
        return domain("phi needs at least two parts");
    }
    let n = c.n() as i64;
    let p = c.partials();
    let mut acc = Q::from_integer(0);
    for k in 1..c.r() {
        let hat = p[k] as i64;
        let w = (c.parts[k - 1] + c.parts[k]) as i64;
        acc += Q::new(w * (n - hat) * hat, 2);
    }
    Ok(acc)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// κ(C) = n! / (n_1! ... n_{r-1}!).
pub fn kappa(c: &Composition) -> Result<u128> {
    if c.r() < 2 {
        return domain("kappa needs at least two parts");
    }
    let den: u128 = c.parts[..c.r() - 1].iter().map(|&p| factorial(p)).product();
    Ok(factorial(c.n()) / den)
}

/// n! / (n_1! ... n_r!), the full multinomial.
pub fn kappa_multinomial(c: &Composition) -> u128 {
    let den: u128 = c.parts.iter().map(|&p| factorial(p)).product();
    factorial(c.n()) / den
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out
}

/// Size of the S_n orbit of the tuple of initial segments {1..n̂_1}, ..., {1..n̂_{r-1}},
/// i.e. of (α̂_{n̂_1}, ..., α̂_{n̂_{r-1}}) for generic α.
pub fn kappa_orbit(c: &Composition) -> Result<u128> {
    if c.n() > 8 {
        return domain("orbit enumeration limited to n <= 8");
    }
    let p = c.partials();
    let masks: Vec<u32> = (1..c.r()).map(|i| (1u32 << p[i]) - 1).collect();
    let mut seen = HashSet::new();
    for perm in permutations(c.n()) {
        let image: Vec<u32> = masks
            .iter()
            .map(|&m| {
                (0..c.n())
                    .filter(|&b| m >> b & 1 == 1)
                    .fold(0u32, |acc, b| acc | 1 << perm[b])
            })
            .collect();
        seen.insert(image);
    }
    Ok(seen.len() as u128)
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaComparison {
    pub composition: String,
    pub remark_formula: u128,
    pub multinomial: u128,
    pub orbit: u128,
    pub remark_matches_orbit: bool,
    pub multinomial_matches_orbit: bool,
}

pub fn compare_kappa(c: &Composition) -> Result<KappaComparison> {
    let remark_formula = kappa(c)?;
    let multinomial = kappa_multinomial(c);
    let orbit = kappa_orbit(c)?;
    Ok(KappaComparison {
        composition: c.to_string(),
        remark_formula,
        multinomial,
        orbit,
        remark_matches_orbit: remark_formula == orbit,
        multinomial_matches_orbit: multinomial == orbit,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub checked: usize,
    pub pass: bool,
    pub counterexample: Option<String>,
}

/// Sum identities over every composition of every n <= n_max:
/// Σ_{k<k'} n_k n_k' + Σ_k C(n_k,2) = C(n,2) and
/// n² + Σ_ℓ (C(n_ℓ,2) - n_ℓ n̂_ℓ) = C(n,2).
pub fn verify_partition_identities(n_max: usize) -> Result<IdentityReport> {
    if n_max < 2 {
        return domain("n_max must be at least 2");
    }
    let mut checked = 0;
    for n in 1..=n_max {
        for c in enumerate_compositions(n, 1)? {
            checked += 1;
            let target = (n * (n - 1) / 2) as i64;
            let parts: Vec<i64> = c.parts.iter().map(|&p| p as i64).collect();
            let mut cross = 0i64;
            for k in 0..parts.len() {
                for kk in k + 1..parts.len() {
                    cross += parts[k] * parts[kk];
                }
            }
            let within: i64 = parts.iter().map(|p| p * (p - 1) / 2).sum();
            if cross + within != target {
                return Ok(IdentityReport {
                    checked,
                    pass: false,
                    counterexample: Some(format!("{c}: first identity gives {}", cross + within)),
                });
            }
            let hats = c.partials();
            let second = (n * n) as i64
                + parts
                    .iter()
                    .enumerate()
                    .map(|(l, p)| p * (p - 1) / 2 - p * hats[l + 1] as i64)
                    .sum::<i64>();
            if second != target {
                return Ok(IdentityReport {
                    checked,
                    pass: false,
                    counterexample: Some(format!("{c}: second identity gives {second}")),
                });
            }
        }
    }
    Ok(IdentityReport {
        checked,
        pass: true,
        counterexample: None,
    })
}

/// The exponents a_k = ρ + k(n-k)/2 (with a_0 = a_n = 0) and
/// b_{i,j} = a_{n̂_{i-1}} - a_{n̂_{i-1}+j} + a_{n̂_i}.
pub fn even_odd_exponents(c: &Composition, rho: Q) -> (Vec<Q>, Vec<Q>) {
    let n = c.n() as i64;
    let a: Vec<Q> = (0..=n)
        .map(|k| {
            if k == 0 || k == n {
                Q::from_integer(0)
            } else {
                rho + Q::new(k * (n - k), 2)
            }
        })
        .collect();
    let p = c.partials();
    let mut b = Vec::with_capacity(c.n());
    for i in 1..=c.r() {
        for j in 1..=c.parts[i - 1] {
            b.push(a[p[i - 1]] - a[p[i - 1] + j] + a[p[i]]);
        }
    }
    (a[1..n as usize].to_vec(), b)
}

fn check_half_integer(rho: Q) -> Result<()> {
    if (rho * 2).is_integer() && !rho.is_integer() {
        Ok(())
    } else {
        domain(format!("rho = {rho} is not a half-integer"))
    }
}

/// Number of non-integral a_k plus non-integral b_{i,j}.
pub fn count_nonintegral_exponents(c: &Composition, rho: Q) -> Result<usize> {
    check_half_integer(rho)?;
    let (a, b) = even_odd_exponents(c, rho);
    Ok(a.iter().chain(b.iter()).filter(|x| !x.is_integer()).count())
}

/// Closed-form count claimed for the even/odd lemma.
pub fn even_odd_closed_form(c: &Composition) -> usize {
    let n = c.n();
    let (n1, nr) = (c.parts[0], c.parts[c.r() - 1]);
    if n % 2 == 1 {
        2 * n - n1 - nr - 1
    } else {
        let inner: usize = c.parts[1..c.r() - 1].iter().map(|p| p.div_ceil(2)).sum();
        n / 2 - 1 + n1 / 2 + nr / 2 + inner
    }
}

/// Lower bound used downstream: n-1 for odd n, n-2 for even n.
pub fn even_odd_lower_bound(n: usize) -> usize {
    if n % 2 == 1 {
        n - 1
    } else {
        n - 2
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvenOddReport {
    pub checked: usize,
    pub closed_form_mismatches: usize,
    pub first_mismatch: Option<String>,
    pub lower_bound_violations: usize,
}

pub fn verify_even_odd(n_max: usize, rhos: &[Q]) -> Result<EvenOddReport> {
    let mut report = EvenOddReport {
        checked: 0,
        closed_form_mismatches: 0,
        first_mismatch: None,
        lower_bound_violations: 0,
    };
    for &rho in rhos {
        for n in 2..=n_max {
            for c in enumerate_compositions(n, 2)? {
                report.checked += 1;
                let got = count_nonintegral_exponents(&c, rho)?;
                let want = even_odd_closed_form(&c);
                if got != want {
                    report.closed_form_mismatches += 1;
                    if report.first_mismatch.is_none() {
                        report.first_mismatch =
                            Some(format!("{c}, rho={rho}: count {got}, closed form {want}"));
                    }
                }
                if got < even_odd_lower_bound(n) {
                    report.lower_bound_violations += 1;
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiReport {
    pub checked: usize,
    pub permutation_invariant: bool,
    pub minimum_ok: bool,
    pub refinement_ok: bool,
    pub counterexample: Option<String>,
}

/// Permutation invariance, the minimum n(n-1)/2 and the refinement rule
/// Φ(.., n', n'', ..) - Φ(.., n'+n'', ..) = (n'+n'') n' n'' / 2, exhaustively for n <= n_max.
pub fn verify_phi_properties(n_max: usize) -> Result<PhiReport> {
    let mut rep = PhiReport {
        checked: 0,
        permutation_invariant: true,
        minimum_ok: true,
        refinement_ok: true,
        counterexample: None,
    };
    for n in 2..=n_max {
        let comps = enumerate_compositions(n, 2)?;
        let mut min = None::<Q>;
        for c in &comps {
            rep.checked += 1;
            let v = phi(c)?;
            min = Some(min.map_or(v, |m| m.min(v)));
            let mut sorted = c.parts.clone();
            sorted.sort_unstable();
            let base = phi(&Composition::new(sorted)?)?;
            if v != base {
                rep.permutation_invariant = false;
                rep.counterexample.get_or_insert(format!("{c}: {v} vs sorted {base}"));
            }
            for k in 0..c.r() {
                let nk = c.parts[k];
                for first in 1..nk {
                    let mut refined = c.parts[..k].to_vec();
                    refined.push(first);
                    refined.push(nk - first);
                    refined.extend_from_slice(&c.parts[k + 1..]);
                    let diff = phi(&Composition::new(refined)?)? - v;
                    let want = Q::new((nk * first * (nk - first)) as i64, 2);
                    if diff != want {
                        rep.refinement_ok = false;
                        rep.counterexample
                            .get_or_insert(format!("refining part {k} of {c} by {first}"));
                    }
                }
            }
        }
        if min != Some(Q::new((n * (n - 1)) as i64, 2)) {
            rep.minimum_ok = false;
            rep.counterexample.get_or_insert(format!("n={n}: min {:?}", min));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(p: &[usize]) -> Composition {
        Composition::new(p.to_vec()).unwrap()
    }

    #[test]
    fn small_enumerations() {
        let c3 = enumerate_compositions(3, 2).unwrap();
        assert_eq!(c3, vec![comp(&[1, 2]), comp(&[2, 1]), comp(&[1, 1, 1])]);
        assert_eq!(enumerate_compositions(4, 2).unwrap().len(), 7);
        assert_eq!(enumerate_compositions(2, 2).unwrap(), vec![comp(&[1, 1])]);
        assert!(enumerate_compositions(0, 1).is_err());
        for n in 1..=12 {
            assert_eq!(enumerate_compositions(n, 1).unwrap().len(), 1 << (n - 1));
        }
    }

    #[test]
    fn admissibility() {
        let a = ContourShift::new(vec![1.0, -1.0, 1.0]).unwrap();
        assert_eq!(
            admissible_compositions(&a),
            vec![comp(&[1, 3]), comp(&[3, 1]), comp(&[1, 2, 1])]
        );
        let a = ContourShift::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(admissible_compositions(&a).len(), 7);
        let a = ContourShift::new(vec![-1.0, -1.0]).unwrap();
        assert!(admissible_compositions(&a).is_empty());
    }

    #[test]
    fn degrees() {
        assert_eq!(degree_d(2).unwrap(), 0);
        assert_eq!(degree_d(3).unwrap(), 3);
        assert_eq!(degree_d(4).unwrap(), 21);
        assert!(degree_d(1).is_err());
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(&comp(&[1, 3])).unwrap(), Q::from_integer(6));
        assert_eq!(phi(&comp(&[2, 2])).unwrap(), Q::from_integer(8));
        assert_eq!(phi(&comp(&[1, 1, 2])).unwrap(), Q::from_integer(9));
        assert!(phi(&comp(&[4])).is_err());
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(&comp(&[1, 3])).unwrap(), 24);
        assert_eq!(kappa(&comp(&[2, 2])).unwrap(), 12);
        assert_eq!(kappa(&comp(&[1, 1, 2])).unwrap(), 24);
        assert_eq!(kappa_orbit(&comp(&[1, 1])).unwrap(), 2);
        assert_eq!(kappa_orbit(&comp(&[2, 2])).unwrap(), 6);
    }

    #[test]
    fn half_integer_guard() {
        assert!(count_nonintegral_exponents(&comp(&[1, 1]), Q::from_integer(1)).is_err());
        assert_eq!(count_nonintegral_exponents(&comp(&[1, 1]), Q::new(3, 2)).unwrap(), 0);
    }
}
