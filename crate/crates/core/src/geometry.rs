//! Iwasawa coordinates on GL(n,R), Weyl elements attached to compositions,
//! modular characters and the ξ_i coordinates of w u.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::Composition;
use crate::error::{domain, Error, Result};
use crate::special::LanglandsParameter;

/// x t(y) with x upper unipotent and t(y) = diag(y_1...y_{n-1}, ..., y_1, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IwasawaPoint {
    pub n: usize,
    /// Full n x n upper unipotent matrix, row-major.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl IwasawaPoint {
    pub fn identity(n: usize) -> Self {
        Self::from_parts(DMatrix::identity(n, n), vec![1.0; n - 1])
    }

    pub fn from_parts(x: DMatrix<f64>, y: Vec<f64>) -> Self {
        let n = x.nrows();
        Self {
            n,
            x: (0..n).map(|i| (0..n).map(|j| x[(i, j)]).collect()).collect(),
            y,
        }
    }

    /// A point with y = 1 and the given strictly upper entries.
    pub fn unipotent(x: DMatrix<f64>) -> Self {
        let n = x.nrows();
        Self::from_parts(x, vec![1.0; n - 1])
    }

    pub fn x_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.x[i][j])
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.x_matrix() * toric_matrix(&self.y)
    }
}

/// t(y) = diag(y_1 ... y_{n-1}, ..., y_1 y_2, y_1, 1).
pub fn toric_diagonal(y: &[f64]) -> Vec<f64> {
    let n = y.len() + 1;
    (0..n).map(|i| y[..n - 1 - i].iter().product()).collect()
}

pub fn toric_matrix(y: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(toric_diagonal(y)))
}

#[derive(Clone, Debug)]
pub struct Iwasawa {
    pub point: IwasawaPoint,
    pub k: DMatrix<f64>,
    pub c: f64,
    /// Diagonal of the triangular factor: D = t(y) c.
    pub diag: Vec<f64>,
}

impl Iwasawa {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.point.matrix() * &self.k * self.c
    }
}

/// g = x t(y) k c by Gram-Schmidt on the rows of g from the bottom up
/// (two passes for numerical orthogonality).
pub fn iwasawa_decompose(g: &DMatrix<f64>) -> Result<Iwasawa> {
    let n = g.nrows();
    if n != g.ncols() || n < 1 {
        return domain("iwasawa_decompose needs a square matrix");
    }
    let scale = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Decomposition("zero or non-finite matrix".into()));
    }
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut u = DMatrix::<f64>::zeros(n, n);
    for i in (0..n).rev() {
        let mut v = g.row(i).transpose();
        for _pass in 0..2 {
            for j in i + 1..n {
                let kj = k.row(j).transpose();
                let proj = v.dot(&kj);
                u[(i, j)] += proj;
                v -= kj * proj;
            }
        }
        let norm = v.norm();
        if norm <= 1e-14 * scale {
            return Err(Error::Decomposition("singular matrix".into()));
        }
        u[(i, i)] = norm;
        k.set_row(i, &(v / norm).transpose());
    }
    let diag: Vec<f64> = (0..n).map(|i| u[(i, i)]).collect();
    let c = diag[n - 1];
    let y: Vec<f64> = (1..n).map(|i| diag[n - 1 - i] / diag[n - i]).collect();
    let x = DMatrix::from_fn(n, n, |i, j| if j < i { 0.0 } else { u[(i, j)] / diag[j] });
    Ok(Iwasawa {
        point: IwasawaPoint::from_parts(x, y),
        k,
        c,
        diag,
    })
}

/// I(x t(y), α) = Π y_i^{α̂_{n-i} + ρ̂_{n-i}} with ρ_i = (n+1)/2 - i.
pub fn power_function(p: &IwasawaPoint, alpha: &LanglandsParameter) -> Result<Complex64> {
    let n = p.n;
    if alpha.n() != n {
        return domain("parameter length does not match the point");
    }
    let rho_hat = |k: usize| (1..=k).map(|i| (n as f64 + 1.0) / 2.0 - i as f64).sum::<f64>();
    let mut log = Complex64::new(0.0, 0.0);
    for i in 1..n {
        log += (alpha.hat(n - i) + rho_hat(n - i)) * p.y[i - 1].ln();
    }
    Ok(log.exp())
}

/// Phase Σ m_k x_{k,k+1} (so ψ_M = e^{2πi phase}) and the character value.
pub fn psi_m(p: &IwasawaPoint, m: &[i64]) -> Result<(f64, Complex64)> {
    if m.len() + 1 != p.n {
        return domain("M must have n-1 entries");
    }
    if m.iter().any(|&v| v == 0) {
        return domain("M entries must be nonzero");
    }
    let phase: f64 = m.iter().enumerate().map(|(k, &mk)| mk as f64 * p.x[k][k + 1]).sum();
    Ok((phase, Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)))
}

/// ψ_M(v^{-1} x v) for v = diag(±1): flips the sign of m_k when v_k v_{k+1} = -1.
pub fn twisted_m(m: &[i64], v: &[i8]) -> Vec<i64> {
    m.iter().enumerate().map(|(k, &mk)| mk * (v[k] * v[k + 1]) as i64).collect()
}

/// Block anti-diagonal permutation: I_{n_1} bottom-left, ..., I_{n_r} top-right.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylElement {
    pub composition: Composition,
    /// Column k of w is the basis vector e_{perm[k]}.
    pub perm: Vec<usize>,
}

impl WeylElement {
    pub fn relevant(c: &Composition) -> Result<Self> {
        if c.r() < 2 {
            return domain("a relevant Weyl element needs at least two blocks");
        }
        let parts = c.parts();
        let mut row_start = vec![0; c.r()];
        let mut pos = 0;
        for i in (0..c.r()).rev() {
            row_start[i] = pos;
            pos += parts[i];
        }
        let mut perm = Vec::with_capacity(c.n());
        for (i, &p) in parts.iter().enumerate() {
            perm.extend((0..p).map(|k| row_start[i] + k));
        }
        Ok(Self {
            composition: c.clone(),
            perm,
        })
    }

    /// Long element w_(1,...,1).
    pub fn long(n: usize) -> Self {
        Self::relevant(&Composition::new(vec![1; n]).unwrap()).unwrap()
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut w = DMatrix::zeros(n, n);
        for (col, &row) in self.perm.iter().enumerate() {
            w[(row, col)] = 1.0;
        }
        w
    }

    /// Positions (i,j), i<j, of Ū_w = (w^{-1} ᵗU w) ∩ U.
    pub fn ubar_pattern(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.perm[i] > self.perm[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Iwasawa y of w t(y) w^{-1}, by matrix conjugation.
pub fn weyl_conjugate_y(w: &WeylElement, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() + 1 != w.n() {
        return domain("y has the wrong length");
    }
    let wm = w.matrix();
    let conj = &wm * toric_matrix(y) * wm.transpose();
    Ok(iwasawa_decompose(&conj)?.point.y)
}

/// Closed form: untouched runs y_{n-n̂_i+j} inside each block and inverted
/// products y_{n-n̂_{i+1}+1} ... y_{n-n̂_{i-1}-1} at the block boundaries.
pub fn weyl_conjugate_y_closed(c: &Composition, y: &[f64]) -> Result<Vec<f64>> {
    let n = c.n();
    if c.r() < 2 || y.len() + 1 != n {
        return domain("need r >= 2 and y of length n-1");
    }
    let p = c.partials();
    let parts = c.parts();
    let mut out = vec![0.0; n - 1];
    for i in 1..=c.r() {
        for j in 1..parts[i - 1] {
            out[p[i - 1] + j - 1] = y[n - p[i] + j - 1];
        }
        if i < c.r() {
            let start = n - p[i + 1] + 1;
            let len = parts[i - 1] + parts[i] - 1;
            let prod: f64 = (start..start + len).map(|k| y[k - 1]).product();
            out[p[i] - 1] = 1.0 / prod;
        }
    }
    Ok(out)
}

/// ‖y‖^a = Π y_k^{a_k}.
pub fn norm_power(y: &[f64], a: &[f64]) -> f64 {
    y.iter().zip(a).map(|(yk, ak)| yk.powf(*ak)).product()
}

/// ‖w y w^{-1}‖^a through the exponent formula
/// Π_i Π_j y_{n-n̂_i+j}^{-a_{n̂_{i-1}} + a_{n̂_{i-1}+j} - a_{n̂_i}}.
pub fn conjugated_norm_power(c: &Composition, y: &[f64], a: &[f64]) -> f64 {
    let n = c.n();
    let ext = |k: usize| if k == 0 || k == n { 0.0 } else { a[k - 1] };
    let p = c.partials();
    let mut out = 1.0;
    for i in 1..=c.r() {
        for j in 1..=c.parts()[i - 1] {
            let idx = n - p[i] + j;
            if idx == n {
                continue;
            }
            let e = -ext(p[i - 1]) + ext(p[i - 1] + j) - ext(p[i]);
            out *= y[idx - 1].powf(e);
        }
    }
    out
}

/// δ(t) = Π t_i^{n+1-2i} on a positive diagonal.
pub fn modular_delta(t: &[f64]) -> f64 {
    let n = t.len() as i32;
    t.iter().enumerate().map(|(i, ti)| ti.powi(n + 1 - 2 * (i as i32 + 1))).product()
}

/// a_j = j(n-j)/2, for which δ^{1/2}(t(y)) = ‖y‖^a.
pub fn rho_exponents(n: usize) -> Vec<f64> {
    (1..n).map(|j| (j * (n - j)) as f64 / 2.0).collect()
}

/// δ^{1/2}(y) δ^{-1/2}(w y w^{-1}).
pub fn delta_w(w: &WeylElement, y: &[f64]) -> f64 {
    let t = toric_diagonal(y);
    let mut conj = vec![0.0; t.len()];
    for (col, &row) in w.perm.iter().enumerate() {
        conj[row] = t[col];
    }
    modular_delta(&t).sqrt() / modular_delta(&conj).sqrt()
}

/// Jacobian of u ↦ t u t^{-1} on Ū_w: Π_{(i,j)} t_i/t_j.
pub fn delta_w_jacobian(w: &WeylElement, y: &[f64]) -> f64 {
    let t = toric_diagonal(y);
    w.ubar_pattern().iter().map(|&(i, j)| t[i] / t[j]).product()
}

/// ξ_i = product of the last i squared diagonal entries of the triangular
/// factor of w u (the Gram determinant of the last i rows).
pub fn xi_values(w: &WeylElement, u: &IwasawaPoint) -> Result<Vec<f64>> {
    let n = w.n();
    if u.n != n {
        return domain("u has the wrong size");
    }
    let pattern = w.ubar_pattern();
    for i in 0..n {
        for j in 0..n {
            let want_free = i < j && pattern.contains(&(i, j));
            let v = u.x[i][j];
            let expected = if i == j { 1.0 } else { 0.0 };
            if !want_free && (v - expected).abs() > 0.0 {
                return domain(format!("u has a nonzero entry at ({},{}) outside Ū_w", i + 1, j + 1));
            }
        }
    }
    if u.y.iter().any(|&v| v != 1.0) {
        return domain("u must have y = 1");
    }
    let g = w.matrix() * u.x_matrix();
    let iw = iwasawa_decompose(&g)?;
    let mut out = Vec::with_capacity(n - 1);
    let mut acc = 1.0;
    for i in 1..n {
        acc *= iw.diag[n - i] * iw.diag[n - i];
        out.push(acc);
    }
    Ok(out)
}

/// The three printed polynomials for n = 4 and the long element.
pub fn xi_long_gl4(x: &DMatrix<f64>) -> [f64; 3] {
    let e = |i: usize, j: usize| x[(i - 1, j - 1)];
    let (x12, x13, x14, x23, x24, x34) = (e(1, 2), e(1, 3), e(1, 4), e(2, 3), e(2, 4), e(3, 4));
    let sq = |v: f64| v * v;
    [
        1.0 + sq(x12) + sq(x13) + sq(x14),
        1.0 + sq(x23) + sq(x24) + sq(x12 * x24 - x14) + sq(x12 * x23 - x13) + sq(x13 * x24 - x14 * x23),
        1.0 + sq(x34) + sq(x23 * x34 - x24) + sq(x12 * x23 * x34 - x13 * x34 - x12 * x24 + x14),
    ]
}
