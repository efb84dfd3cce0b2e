//! Complex log-Gamma (Lanczos, g = 607/128) and friends.

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// True when z is (numerically exactly) one of 0, -1, -2, ...
pub fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn lanczos(z: Complex64) -> Complex64 {
    let zm = z - 1.0;
    let mut sum = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += *c / (zm + k as f64);
    }
    let base = zm + LANCZOS_G + 0.5;
    (zm + 0.5) * base.ln() - base + sum.ln() + HALF_LN_2PI
}

fn ln_sin_pi(z: Complex64) -> Complex64 {
    use std::f64::consts::{FRAC_PI_2, LN_2, PI};
    let i = Complex64::i();
    if z.im >= 0.0 {
        -i * PI * z + Complex64::new(-LN_2, FRAC_PI_2) + (1.0 - (2.0 * PI * i * z).exp()).ln()
    } else {
        i * PI * z + Complex64::new(-LN_2, -FRAC_PI_2) + (1.0 - (-2.0 * PI * i * z).exp()).ln()
    }
}

/// log Γ(z) on the branch fixed by log Γ(z+1) = log Γ(z) + log z with the
/// principal logarithm (real on the positive axis, continuous off the
/// negative real axis). Far left of the origin the reflection formula is
/// used and the imaginary part is only meaningful modulo 2π.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("log_gamma of non-finite {z}")));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(z));
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    if z.re > -60.0 {
        let shift = (0.5 - z.re).ceil() as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..shift {
            acc += (z + k as f64).ln();
        }
        return Ok(lanczos(z + shift as f64) - acc);
    }
    Ok(Complex64::new(std::f64::consts::PI.ln(), 0.0) - ln_sin_pi(z) - lanczos(1.0 - z))
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    log_gamma(z).map(|l| l.exp())
}

/// 1/Γ(z), entire; exactly zero at the poles of Γ.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    match log_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

/// log |Γ(x)| for real x, erroring at poles.
pub fn ln_gamma_real(x: f64) -> Result<f64> {
    log_gamma(Complex64::new(x, 0.0)).map(|l| l.re)
}

/// Rising factorial (z)_k = z (z+1) ... (z+k-1).
pub fn pochhammer(z: Complex64, k: u32) -> Complex64 {
    (0..k).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z + j as f64))
}

/// Γ_R(z) = Γ((1/2 + R + z)/2) / Γ(z); zero at z = 0, -1, -2, ...
pub fn gamma_r(z: Complex64, r: u32) -> Complex64 {
    if is_nonpositive_integer(z) {
        return Complex64::new(0.0, 0.0);
    }
    let num = (Complex64::new(0.5 + r as f64, 0.0) + z) * 0.5;
    match (log_gamma(num), log_gamma(z)) {
        (Ok(a), Ok(b)) => (a - b).exp(),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// log |Γ_R(z)|, -inf at the zeros.
pub fn ln_abs_gamma_r(z: Complex64, r: u32) -> f64 {
    if is_nonpositive_integer(z) {
        return f64::NEG_INFINITY;
    }
    let num = (Complex64::new(0.5 + r as f64, 0.0) + z) * 0.5;
    match (log_gamma(num), log_gamma(z)) {
        (Ok(a), Ok(b)) => a.re - b.re,
        _ => f64::NEG_INFINITY,
    }
}

/// Stirling's leading modulus √(2π) |t|^{σ-1/2} e^{-π|t|/2}.
pub fn stirling_modulus(z: Complex64) -> f64 {
    let t = z.im.abs();
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z.re - 0.5) * (-std::f64::consts::PI * t / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn integer_and_half_values() {
        assert!((log_gamma(c(5.0, 0.0)).unwrap() - c(24f64.ln(), 0.0)).norm() < 1e-14);
        let half = 0.5 * std::f64::consts::PI.ln();
        assert!((log_gamma(c(0.5, 0.0)).unwrap() - c(half, 0.0)).norm() < 1e-14);
        assert!(matches!(log_gamma(c(-3.0, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn gamma_r_values() {
        assert_eq!(gamma_r(c(0.0, 0.0), 2), c(0.0, 0.0));
        assert!((gamma_r(c(0.5, 0.0), 2) - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn recurrence_branch() {
        for &z in &[c(0.3, 2.0), c(-2.7, -5.0), c(4.0, 40.0), c(-0.5, 0.1)] {
            let lhs = log_gamma(z + 1.0).unwrap();
            let rhs = log_gamma(z).unwrap() + z.ln();
            assert!((lhs - rhs).norm() < 1e-12, "{z}");
        }
    }
}
