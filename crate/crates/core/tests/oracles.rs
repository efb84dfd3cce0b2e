//! Frozen reference values (mpmath, 30 digits) and independent recomputations.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C;

use kuznetsov::combinatorics::{degree_d, phi, Composition, Q};
use kuznetsov::special::{bound_b_ext, log_gamma, LanglandsParameter};
use kuznetsov::testfn::{p_sharp, TestFunctionParams};
use kuznetsov::trace::kloosterman_gl2;
use kuznetsov::whittaker::{mellin_gl2, mellin_gl3_closed, mellin_recursive, MellinPoint, WhittakerEvaluator};

fn close(a: C, b: C, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm()
}

#[test]
fn log_gamma_mpmath() {
    let cases = [
        (C::new(0.5, 0.0), C::new(0.572364942924700087, 0.0)),
        (C::new(3.7, -2.2), C::new(0.726446751624426474, -2.718064292441145666)),
        (C::new(-2.5, 0.3), C::new(-0.432088892613201921, -9.093345421289741507)),
        (C::new(0.1, 40.0), C::new(-63.38846256993901994, 106.9259012676440596)),
        (C::new(-7.3, -15.0), C::new(-44.09084388344554637, -11.42546638014862623)),
    ];
    for (z, want) in cases {
        let got = log_gamma(z).unwrap();
        let d = got - want;
        let k = (d.im / TAU).round();
        let err = C::new(d.re, d.im - k * TAU).norm();
        assert!(err < 1e-12 * want.norm().max(1.0), "{z}: {got} vs {want}");
    }
}

#[test]
fn p_sharp_is_gamma_three_quarters_squared() {
    let params = TestFunctionParams::new(3.0, 1, 2).unwrap();
    let v = p_sharp(&LanglandsParameter::new(vec![C::new(0.0, 0.0); 2]).unwrap(), &params).unwrap();
    assert!((v.re - 1.501_646_094_680_629_7).abs() < 1e-13);
}

#[test]
fn gl2_mellin_mpmath() {
    let v = mellin_gl2(C::new(0.0, 1.3), C::new(0.8, 0.4)).unwrap();
    assert!(close(v, C::new(0.116067619497462833, 0.0236937245006917169), 1e-13));
}

#[test]
fn gl3_barnes_mpmath_and_recursion() {
    let alpha = LanglandsParameter::tempered_from(&[0.7, -1.9]);
    let s = MellinPoint::new(vec![C::new(0.75, 0.3), C::new(0.75, -1.2)]);
    let want = C::new(0.000248202938549408759, -0.000303275867529480946);
    assert!(close(mellin_gl3_closed(&alpha, &s, C::new(1.0, 0.0)).unwrap(), want, 1e-12));
    assert!(close(mellin_recursive(3, &alpha, &s, 1e-10).unwrap().value, want, 1e-8));
}

#[test]
fn gl4_origin_is_two_zeta_three() {
    let alpha = LanglandsParameter::new(vec![C::new(0.0, 0.0); 4]).unwrap();
    let ev = WhittakerEvaluator::new(alpha).unwrap().with_tol(1e-10).unwrap();
    let v = ev.eval(&MellinPoint::real(&[1.0, 1.0, 1.0])).unwrap();
    assert!(close(v.value, C::new(2.404_113_806_319_188_6, 0.0), 1e-9), "{}", v.value);
}

#[test]
fn degree_values() {
    let d: Vec<u128> = (2..=5).map(|n| degree_d(n).unwrap()).collect();
    assert_eq!(d, vec![0, 3, 21, 100]);
}

#[test]
fn phi_values_by_hand() {
    let p = |v: &[usize]| phi(&Composition::new(v.to_vec()).unwrap()).unwrap();
    assert_eq!(p(&[1, 1]), Q::from_integer(1));
    assert_eq!(p(&[1, 2]), Q::from_integer(3));
    assert_eq!(p(&[2, 2]), Q::from_integer(8));
    assert_eq!(p(&[1, 3]), Q::from_integer(6));
    assert_eq!(p(&[1, 1, 1, 1]), Q::from_integer(10));
}

#[test]
fn kloosterman_against_direct_sum() {
    for c in 1..=60i64 {
        for (m, l) in [(1, 1), (2, 5), (-3, 7)] {
            let mut direct = C::new(0.0, 0.0);
            for x in 0..c {
                if let Some(inv) = (0..c).find(|y| (x * y).rem_euclid(c) == 1 % c) {
                    if num_integer::gcd(x, c) == 1 {
                        direct += C::from_polar(1.0, 2.0 * PI * (m * x + l * inv) as f64 / c as f64);
                    }
                }
            }
            let got = kloosterman_gl2(m, l, c).unwrap();
            assert!((got - direct).norm() < 1e-10, "c={c}: {got} vs {direct}");
        }
    }
}

#[test]
fn bound_b_table() {
    for (a, want) in [(-0.5, 0.0), (0.25, 0.5), (0.5, 1.0), (0.75, 1.0), (1.25, 1.5), (2.0, 2.0), (2.9, 3.0)] {
        assert!((bound_b_ext(a) - want).abs() < 1e-15, "B({a})");
    }
}

