//! Desk-scale pieces of the trace formula: GL(2) Kloosterman sums, the
//! convergence series K(c,w;a), exponent bookkeeping for the geometric side,
//! Eisenstein Hecke divisor sums and the cuspidal orthogonality ratio.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_compositions, phi, Composition, Q};
use crate::error::{domain, Error, Result};
use crate::geometry::WeylElement;
use crate::quadrature::pairwise_sum_real;
use crate::special::{bound_b_ext, LanglandsParameter};
use crate::testfn::{h_value, GaussianWidth, TestFunctionParams};

type C = Complex64;

/// x^{-1} mod c for gcd(x, c) = 1.
pub fn mod_inverse(x: i64, c: i64) -> Option<i64> {
    let g = x.rem_euclid(c).extended_gcd(&c);
    (g.gcd == 1).then(|| g.x.rem_euclid(c))
}

/// Number of x mod c, gcd(x,c) = 1, with (m x + ℓ x̄) ≡ k, for each k.
pub fn kloosterman_phase_counts(m: i64, l: i64, c: i64) -> Vec<u64> {
    let mut counts = vec![0u64; c as usize];
    for x in 0..c {
        if let Some(inv) = mod_inverse(x, c) {
            let k = ((m as i128 * x as i128 + l as i128 * inv as i128).rem_euclid(c as i128)) as usize;
            counts[k] += 1;
        }
    }
    counts
}

/// S(m, ℓ; c) = Σ_{x mod c, (x,c)=1} e^{2πi(m x + ℓ x̄)/c}.
pub fn kloosterman_gl2(m: i64, l: i64, c: i64) -> Result<C> {
    if c < 1 {
        return domain("modulus must be positive");
    }
    let counts = kloosterman_phase_counts(m, l, c);
    let mut re = Vec::new();
    let mut im = Vec::new();
    for (k, &n) in counts.iter().enumerate() {
        if n > 0 {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 / c as f64);
            re.push(n as f64 * theta.cos());
            im.push(n as f64 * theta.sin());
        }
    }
    Ok(C::new(pairwise_sum_real(&re), pairwise_sum_real(&im)))
}

pub fn divisor_count(c: u64) -> u64 {
    (1..=c).take_while(|d| d * d <= c).map(|d| if c % d != 0 { 0 } else if d * d == c { 1 } else { 2 }).sum()
}

pub fn euler_phi(c: u64) -> u64 {
    (1..=c).filter(|x| x.gcd(&c) == 1).count() as u64
}

#[derive(Clone, Debug, Serialize)]
pub struct WeilSweep {
    pub c_max: i64,
    pub max_imag: f64,
    pub weil_violations: Vec<i64>,
    pub trivial_violations: Vec<i64>,
    /// max |S(1,1;c)| / (d(c) √c).
    pub max_weil_ratio: f64,
}

/// Reality, the Weil bound |S(1,1;c)| ≤ d(c)√c and |S| ≤ φ(c) for c ≤ c_max.
pub fn weil_sweep(c_max: i64) -> Result<WeilSweep> {
    if c_max < 1 {
        return domain("c_max must be positive");
    }
    let rows: Vec<(i64, f64, f64, f64, f64)> = (1..=c_max)
        .into_par_iter()
        .map(|c| {
            let s = kloosterman_gl2(1, 1, c).unwrap();
            let weil = divisor_count(c as u64) as f64 * (c as f64).sqrt();
            (c, s.im.abs(), s.norm(), weil, euler_phi(c as u64) as f64)
        })
        .collect();
    let tol = 1e-9;
    Ok(WeilSweep {
        c_max,
        max_imag: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        weil_violations: rows.iter().filter(|r| r.2 > r.3 + tol).map(|r| r.0).collect(),
        trivial_violations: rows.iter().filter(|r| r.2 > r.4 + tol).map(|r| r.0).collect(),
        max_weil_ratio: rows.iter().map(|r| r.2 / r.3).fold(0.0, f64::max),
    })
}

/// |S(m,ℓ;c1c2) - S(m c̄2², ℓ; c1) S(m c̄1², ℓ; c2)| for coprime c1, c2.
pub fn twisted_multiplicativity_error(m: i64, l: i64, c1: i64, c2: i64) -> Result<f64> {
    if c1.gcd(&c2) != 1 {
        return domain("moduli must be coprime");
    }
    let i1 = mod_inverse(c1, c2).unwrap_or(0);
    let i2 = mod_inverse(c2, c1).unwrap_or(0);
    let lhs = kloosterman_gl2(m, l, c1 * c2)?;
    let rhs = kloosterman_gl2(m * i2 * i2 % c1.max(1), l, c1)? * kloosterman_gl2(m * i1 * i1 % c2.max(1), l, c2)?;
    Ok((lhs - rhs).norm())
}

/// Kloosterman data on GL(n): moduli and the Weyl element. Only n = 2 is
/// evaluated.
#[derive(Clone, Debug)]
pub struct KloostermanQuery {
    pub l: Vec<i64>,
    pub m: Vec<i64>,
    pub moduli: Vec<i64>,
    pub weyl: WeylElement,
}

impl KloostermanQuery {
    pub fn new(l: Vec<i64>, m: Vec<i64>, moduli: Vec<i64>, weyl: WeylElement) -> Result<Self> {
        let n = weyl.n();
        if l.len() + 1 != n || m.len() + 1 != n || moduli.len() + 1 != n {
            return domain("L, M and the moduli need n-1 entries");
        }
        if moduli.iter().any(|&c| c < 1) {
            return domain("moduli must be positive");
        }
        Ok(Self { l, m, moduli, weyl })
    }

    pub fn evaluate(&self) -> Result<C> {
        match self.weyl.n() {
            2 => kloosterman_gl2(self.m[0], self.l[0], self.moduli[0]),
            n => Err(Error::NotImplemented(format!("Kloosterman sums on GL({n})"))),
        }
    }

    /// Trivial bound c_1 c_2 ... c_{n-1}.
    pub fn trivial_bound(&self) -> f64 {
        self.moduli.iter().map(|&c| c as f64).product()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub a1: f64,
    /// Exponent 1 + 4 a_1 on c.
    pub exponent: f64,
    pub c_max: i64,
    pub partial_sum: f64,
    /// Sums over dyadic blocks [2^k, 2^{k+1}).
    pub blocks: Vec<f64>,
    pub block_ratios: Vec<f64>,
    pub converging: bool,
    /// The same series with φ(c) in place of |S|.
    pub trivial_partial_sum: f64,
}

/// Partial sums of Σ_{v=±1} Σ_c |S(1, v; c)| / c^{1+4a_1} (n = 2).
pub fn kloosterman_tail(a1: f64, c_max: i64) -> Result<TailReport> {
    if c_max < 2 {
        return domain("c_max must be at least 2");
    }
    let exponent = 1.0 + 4.0 * a1;
    let terms: Vec<(f64, f64)> = (1..=c_max)
        .into_par_iter()
        .map(|c| {
            let s = kloosterman_gl2(1, 1, c).unwrap().norm() + kloosterman_gl2(1, -1, c).unwrap().norm();
            let w = (c as f64).powf(-exponent);
            (s * w, 2.0 * euler_phi(c as u64) as f64 * w)
        })
        .collect();
    let mut blocks = Vec::new();
    let mut lo = 1usize;
    while 2 * lo - 1 < terms.len() {
        let hi = (2 * lo).min(terms.len() + 1);
        let block: Vec<f64> = terms[lo - 1..hi - 1].iter().map(|t| t.0).collect();
        if hi - lo == lo {
            blocks.push(pairwise_sum_real(&block));
        }
        lo *= 2;
    }
    let block_ratios: Vec<f64> = blocks.windows(2).map(|w| w[1] / w[0]).collect();
    let tail: Vec<f64> = block_ratios.iter().rev().take(3).copied().collect();
    let converging = !tail.is_empty() && tail.iter().all(|&r| r < 0.9);
    Ok(TailReport {
        a1,
        exponent,
        c_max,
        partial_sum: pairwise_sum_real(&terms.iter().map(|t| t.0).collect::<Vec<_>>()),
        blocks,
        block_ratios,
        converging,
        trivial_partial_sum: pairwise_sum_real(&terms.iter().map(|t| t.1).collect::<Vec<_>>()),
    })
}

/// The tail at a_1 = ρ + (1+ε)/2.
pub fn kloosterman_tail_rho(rho: f64, eps: f64, c_max: i64) -> Result<TailReport> {
    kloosterman_tail(rho + 0.5 * (1.0 + eps), c_max)
}

/// a_j = ρ + j(n-j)/2 (1+ε).
pub fn choice_of_a(n: usize, rho: f64, eps: f64) -> Vec<f64> {
    (1..n).map(|j| rho + (j * (n - j)) as f64 / 2.0 * (1.0 + eps)).collect()
}

/// b_{n-n̂_i+j} = a_{n̂_{i-1}} - a_{n̂_{i-1}+j} + a_{n̂_i} + shift, with a_0 = a_n = 0.
pub fn choice_of_b(c: &Composition, a: &[f64], shift: f64) -> Vec<f64> {
    let n = c.n();
    let ext = |k: usize| if k == 0 || k == n { 0.0 } else { a[k - 1] };
    let p = c.partials();
    let mut b = vec![0.0; n - 1];
    for i in 1..=c.r() {
        for j in 1..=c.parts()[i - 1] {
            let idx = n - p[i] + j;
            if idx < n {
                b[idx - 1] = ext(p[i - 1]) - ext(p[i - 1] + j) + ext(p[i]) + shift;
            }
        }
    }
    b
}

fn rho_check(rho: f64) -> Result<()> {
    if ((rho - 0.5) - (rho - 0.5).round()).abs() > 1e-12 {
        return domain("ρ must lie in 1/2 + Z");
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositionExponent {
    pub composition: String,
    pub phi: f64,
    /// ε-free T-exponent beyond R(2D(n)+n(n-1)).
    pub t_exponent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentReport {
    pub n: usize,
    pub rho: f64,
    pub compositions: Vec<CompositionExponent>,
    pub lm_exponent: f64,
    pub rho_threshold: f64,
    /// (n-1)(n+4)/2 - ⌊(n-1)/2⌋ - ρn - n(n-1)/2.
    pub slack: f64,
    pub phi_min: f64,
}

fn q_to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Exponents for the geometric side at level ρ; `only` restricts to one
/// composition.
pub fn iwbounds_exponent(n: usize, rho: f64, only: Option<&Composition>) -> Result<ExponentReport> {
    rho_check(rho)?;
    if n < 2 {
        return domain("n must be at least 2");
    }
    let base = ((n - 1) * (n + 4)) as f64 / 2.0 - ((n - 1) / 2) as f64 - rho * n as f64;
    let comps = match only {
        Some(c) => vec![c.clone()],
        None => enumerate_compositions(n, 2)?,
    };
    let mut rows = Vec::new();
    for c in &comps {
        let ph = q_to_f64(phi(c)?);
        rows.push(CompositionExponent {
            composition: c.to_string(),
            phi: ph,
            t_exponent: base - ph,
        });
    }
    let phi_min = enumerate_compositions(n, 2)?
        .iter()
        .map(|c| phi(c).map(q_to_f64))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let nf = n as f64;
    Ok(ExponentReport {
        n,
        rho,
        compositions: rows,
        lm_exponent: 2.0 * rho + (nf * nf + 1.0) / 4.0,
        rho_threshold: if n % 2 == 1 { 1.5 - 1.5 / nf } else { 1.5 - 1.0 / nf },
        slack: base - (n * (n - 1)) as f64 / 2.0,
        phi_min,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AplusBRow {
    pub composition: String,
    pub sign: i8,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AplusBReport {
    pub n: usize,
    pub rho: f64,
    pub eps_prime: f64,
    pub eps: f64,
    pub rows: Vec<AplusBRow>,
    pub all_hold: bool,
}

fn aplusb_row(c: &Composition, rho: f64, eps_prime: f64, eps: f64, sign: i8) -> Result<AplusBRow> {
    let n = c.n();
    let delta = 2.0 * eps_prime / (n * n) as f64;
    let a = choice_of_a(n, rho, delta);
    let b = choice_of_b(c, &a, sign as f64 * delta / 2.0);
    let lhs: f64 = a.iter().chain(&b).map(|&x| bound_b_ext(x)).sum();
    let rhs = ((n - 1) / 2) as f64 + n as f64 * rho + q_to_f64(phi(c)?) - eps;
    Ok(AplusBRow {
        composition: c.to_string(),
        sign,
        lhs,
        rhs,
        holds: lhs >= rhs,
    })
}

/// Σ (B(a_j) + B(b_j)) ≥ ⌊(n-1)/2⌋ + nρ + Φ(C) - ε for the given
/// composition (or all of length ≥ 2), both signs of the ±δ/2 shift.
pub fn verify_aplusb(n: usize, rho: f64, only: Option<&Composition>, eps_prime: f64, eps: f64) -> Result<AplusBReport> {
    rho_check(rho)?;
    let comps = match only {
        Some(c) => vec![c.clone()],
        None => enumerate_compositions(n, 2)?,
    };
    let mut rows = Vec::new();
    for c in &comps {
        for sign in [1i8, -1] {
            rows.push(aplusb_row(c, rho, eps_prime, eps, sign)?);
        }
    }
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(AplusBReport {
        n,
        rho,
        eps_prime,
        eps,
        rows,
        all_hold,
    })
}

/// A Hecke-Maass form on GL(2) given by its spectral parameter, Hecke
/// eigenvalues λ(k) and L(1, Ad φ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaassFormRecord {
    pub r: f64,
    pub hecke: BTreeMap<u64, f64>,
    pub adjoint_l: f64,
    pub source: String,
}

impl MaassFormRecord {
    pub fn lambda(&self, k: u64) -> Option<f64> {
        if k == 1 {
            return Some(1.0);
        }
        self.hecke.get(&k).copied()
    }

    pub fn alpha(&self) -> LanglandsParameter {
        LanglandsParameter::tempered_from(&[self.r])
    }

    /// Coprime pairs p, q with pq in range where λ(p)λ(q) ≠ λ(pq).
    pub fn multiplicativity_violations(&self, tol: f64) -> Vec<(u64, u64)> {
        let max = self.hecke.keys().copied().max().unwrap_or(1);
        let mut out = Vec::new();
        for p in 2..=max {
            for q in p + 1..=max / p {
                if p.gcd(&q) != 1 {
                    continue;
                }
                if let (Some(a), Some(b), Some(ab)) = (self.lambda(p), self.lambda(q), self.lambda(p * q)) {
                    if (a * b - ab).abs() > tol {
                        out.push((p, q));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaassData {
    pub records: Vec<MaassFormRecord>,
    pub warnings: Vec<String>,
}

/// Reads `r,lambda_2,...,lambda_K,adjoint_L` (an optional `lambda_1`
/// column must equal 1, an optional trailing `source` column is kept).
pub fn ingest_maass_csv(path: &Path) -> Result<MaassData> {
    let text = std::fs::read_to_string(path)?;
    parse_maass_csv(&text, &path.display().to_string())
}

pub fn parse_maass_csv(text: &str, default_source: &str) -> Result<MaassData> {
    if text.trim().is_empty() {
        return Ok(MaassData {
            records: Vec::new(),
            warnings: Vec::new(),
        });
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
    if cols.first() != Some(&"r") {
        return Err(parse_err(1, "first column must be r".into()));
    }
    let has_source = cols.last() == Some(&"source");
    let l_idx = if has_source { cols.len() - 2 } else { cols.len() - 1 };
    if cols.get(l_idx) != Some(&"adjoint_L") || l_idx < 1 {
        return Err(parse_err(1, "adjoint_L column missing".into()));
    }
    let mut ks = Vec::new();
    for (pos, col) in cols[1..l_idx].iter().enumerate() {
        let k: u64 = col
            .strip_prefix("lambda_")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| parse_err(1, format!("unexpected column {col}")))?;
        if pos > 0 && k != ks[pos - 1] + 1 {
            return Err(parse_err(1, "lambda columns must be consecutive".into()));
        }
        ks.push(k);
    }
    if let Some(&first) = ks.first() {
        if first > 2 {
            return Err(parse_err(1, "lambda columns must start at 1 or 2".into()));
        }
    }
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| parse_err(line, e.to_string()))?;
        if row.len() != cols.len() {
            return Err(parse_err(line, format!("expected {} fields, got {}", cols.len(), row.len())));
        }
        let num = |j: usize| -> Result<f64> {
            row[j]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad number {:?} in column {}", &row[j], cols[j])))
        };
        let r = num(0)?;
        let mut hecke = BTreeMap::new();
        for (pos, &k) in ks.iter().enumerate() {
            let v = num(pos + 1)?;
            if k == 1 {
                if (v - 1.0).abs() > 1e-12 {
                    return Err(parse_err(line, format!("λ(1) = {v}, expected 1")));
                }
                continue;
            }
            hecke.insert(k, v);
        }
        let adjoint_l = num(l_idx)?;
        if !(adjoint_l > 0.0) {
            return Err(parse_err(line, "adjoint_L must be positive".into()));
        }
        let source = if has_source { row[cols.len() - 1].to_string() } else { default_source.to_string() };
        let rec = MaassFormRecord { r, hecke, adjoint_l, source };
        for (p, q) in rec.multiplicativity_violations(1e-6) {
            warnings.push(format!("line {line}: λ({p})λ({q}) ≠ λ({})", p * q));
        }
        records.push(rec);
    }
    Ok(MaassData { records, warnings })
}

pub fn write_maass_csv(records: &[MaassFormRecord], k_max: u64, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(e.to_string()))?;
    let mut header = vec!["r".to_string()];
    header.extend((2..=k_max).map(|k| format!("lambda_{k}")));
    header.push("adjoint_L".into());
    header.push("source".into());
    w.write_record(&header).map_err(|e| Error::Data(e.to_string()))?;
    for rec in records {
        let mut row = vec![rec.r.to_string()];
        for k in 2..=k_max {
            row.push(rec.lambda(k).unwrap_or(0.0).to_string());
        }
        row.push(rec.adjoint_l.to_string());
        row.push(rec.source.clone());
        w.write_record(&row).map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Non-physical records: spectral parameters spread over [1, r_max],
/// multiplicative λ with random ±1 at prime powers, L(1,Ad) in [0.5, 2].
pub fn synthetic_fixture(count: usize, k_max: u64, r_max: f64, seed: u64) -> Vec<MaassFormRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|j| {
            let r = 1.0 + (r_max - 1.0) * (j as f64 + rng.gen_range(0.0..1.0)) / count as f64;
            let mut hecke = BTreeMap::new();
            for k in 2..=k_max {
                let p = (2..=k).find(|&p| k % p == 0).unwrap();
                let mut pk = 1;
                while k % (pk * p) == 0 {
                    pk *= p;
                }
                let value = if pk == k {
                    if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
                } else {
                    hecke[&pk] * hecke.get(&(k / pk)).copied().unwrap_or(1.0)
                };
                hecke.insert(k, value);
            }
            MaassFormRecord {
                r,
                hecke,
                adjoint_l: rng.gen_range(0.5..2.0),
                source: "synthetic".into(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CuspidalSum {
    pub diagonal: f64,
    pub off_diagonal: f64,
    pub ratio: f64,
    pub used: usize,
}

/// Σ_j λ_j(ℓ)λ_j(m) h(α^(j))/L_j, the ℓ = m = 1 normaliser Σ_j h/L_j and
/// their ratio; records whose Gaussian weight is below 1e-12 are skipped.
pub fn cuspidal_sum(forms: &[MaassFormRecord], params: &TestFunctionParams, l: u64, m: u64) -> Result<CuspidalSum> {
    if forms.is_empty() {
        return domain("no forms supplied");
    }
    if params.n != 2 {
        return Err(Error::NotImplemented("cuspidal sums only for n = 2".into()));
    }
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (idx, f) in forms.iter().enumerate() {
        let alpha = f.alpha();
        let gauss = 2.0 * GaussianWidth::TwoTSquared.ln_factor(alpha.square_sum(), params.t).re;
        if gauss < (1e-12f64).ln() {
            continue;
        }
        let missing = |k| Error::Data(format!("record {idx} (r = {}) has no λ({k})", f.r));
        let ll = f.lambda(l).ok_or_else(|| missing(l))?;
        let lm = f.lambda(m).ok_or_else(|| missing(m))?;
        let w = h_value(&alpha, params)? / f.adjoint_l;
        num.push(ll * lm * w);
        den.push(w);
    }
    let used = den.len();
    let diagonal = pairwise_sum_real(&den);
    let off_diagonal = pairwise_sum_real(&num);
    Ok(CuspidalSum {
        diagonal,
        off_diagonal,
        ratio: off_diagonal / diagonal,
        used,
    })
}

/// One factor in a Hecke divisor sum.
#[derive(Clone, Debug)]
pub enum HeckeFactor<'a> {
    /// A GL(1) block (λ ≡ 1).
    Unit,
    Form(&'a MaassFormRecord),
}

impl HeckeFactor<'_> {
    fn size(&self) -> usize {
        match self {
            Self::Unit => 1,
            Self::Form(_) => 2,
        }
    }

    fn lambda(&self, k: u64) -> Result<f64> {
        match self {
            Self::Unit => Ok(1.0),
            Self::Form(f) => f.lambda(k).ok_or_else(|| Error::Data(format!("no λ({k}) for r = {}", f.r))),
        }
    }
}

fn ordered_factorizations(m: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![m]];
    }
    let mut out = Vec::new();
    for d in (1..=m).filter(|d| m % d == 0) {
        for mut rest in ordered_factorizations(m / d, parts - 1) {
            rest.insert(0, d);
            out.push(rest);
        }
    }
    out
}

/// Σ_{c_1⋯c_r = m} Π λ_i(c_i) c_i^{s_i}.
pub fn hecke_divisor_sum(m: u64, s: &[C], factors: &[HeckeFactor]) -> Result<C> {
    if m < 1 {
        return domain("m must be positive");
    }
    if s.len() != factors.len() || s.is_empty() {
        return domain("one s_i per factor");
    }
    let weighted: C = s.iter().zip(factors).map(|(si, f)| si * f.size() as f64).sum();
    if weighted.norm() > 1e-12 * s.iter().map(|z| z.norm()).fold(1.0, f64::max) {
        return domain("Σ n_i s_i must vanish");
    }
    let mut total = C::new(0.0, 0.0);
    for fac in ordered_factorizations(m, factors.len()) {
        let mut term = C::new(1.0, 0.0);
        for ((ci, si), f) in fac.iter().zip(s).zip(factors) {
            term *= f.lambda(*ci)? * (si * (*ci as f64).ln()).exp();
        }
        total += term;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_kloosterman() {
        assert!((kloosterman_gl2(1, 1, 1).unwrap() - 1.0).norm() < 1e-12);
        assert!((kloosterman_gl2(1, 1, 2).unwrap() - 1.0).norm() < 1e-12);
        assert!((kloosterman_gl2(1, 1, 3).unwrap() + 1.0).norm() < 1e-12);
    }

    #[test]
    fn twisted() {
        for (c1, c2) in [(3, 4), (5, 7), (8, 9), (11, 13)] {
            for (m, l) in [(1, 1), (2, 3), (5, -1)] {
                assert!(twisted_multiplicativity_error(m, l, c1, c2).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn exponent_n4() {
        let r = iwbounds_exponent(4, 1.5, None).unwrap();
        assert_eq!(r.lm_exponent, 29.0 / 4.0);
        assert!(r.slack <= 0.0);
        assert_eq!(r.phi_min, 6.0);
    }

    #[test]
    fn aplusb_n4() {
        let r = verify_aplusb(4, 1.5, None, 1e-4, 0.01).unwrap();
        assert_eq!(r.rows.len(), 14);
        assert!(r.all_hold);
    }

    #[test]
    fn borel_divisor_sum() {
        let s = C::new(0.3, 1.2);
        let v = hecke_divisor_sum(2, &[s, -s], &[HeckeFactor::Unit, HeckeFactor::Unit]).unwrap();
        let want = (s * 2f64.ln()).exp() + (-s * 2f64.ln()).exp();
        assert!((v - want).norm() < 1e-14);
    }

    #[test]
    fn fixture_is_multiplicative() {
        for rec in synthetic_fixture(10, 30, 20.0, 7) {
            assert!(rec.multiplicativity_violations(1e-12).is_empty());
        }
    }
}
