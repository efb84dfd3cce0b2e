use num_complex::Complex64 as C;
use proptest::prelude::*;

use kuznetsov::combinatorics::{enumerate_compositions, phi, Composition};
use kuznetsov::config::RunConfig;
use kuznetsov::geometry::{delta_w, delta_w_jacobian, iwasawa_decompose, weyl_conjugate_y, weyl_conjugate_y_closed, WeylElement};
use kuznetsov::special::{log_gamma, LanglandsParameter};
use kuznetsov::testfn::{h_value, TestFunctionParams};
use kuznetsov::trace::{self, HeckeFactor, MaassFormRecord};
use kuznetsov::whittaker::{shift_identity_check, MellinPoint};

fn composition(max_n: usize) -> impl Strategy<Value = Composition> {
    (2..=max_n).prop_flat_map(|n| {
        let all = enumerate_compositions(n, 2).unwrap();
        (0..all.len()).prop_map(move |i| all[i].clone())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_reversal_invariant_and_bounded(c in composition(9)) {
        let n = c.n() as i64;
        let v = phi(&c).unwrap();
        prop_assert_eq!(v, phi(&c.reversed()).unwrap());
        prop_assert!(v >= kuznetsov::combinatorics::Q::new(n * (n - 1), 2));
    }

    #[test]
    fn iwasawa_round_trip(n in 2usize..=6, entries in prop::collection::vec(-2.0f64..2.0, 36)) {
        let g = nalgebra::DMatrix::from_fn(n, n, |i, j| entries[i * 6 + j]);
        prop_assume!(g.determinant().abs() > 1e-2);
        let iw = iwasawa_decompose(&g).unwrap();
        prop_assert!((iw.reconstruct() - &g).norm() <= 1e-12 * g.norm());
        prop_assert!(iw.point.y.iter().all(|&y| y > 0.0));
    }

    #[test]
    fn delta_w_matches_jacobian(c in composition(6), ys in prop::collection::vec(0.1f64..5.0, 5)) {
        let w = WeylElement::relevant(&c).unwrap();
        let y = &ys[..c.n() - 1];
        prop_assert!((delta_w(&w, y) / delta_w_jacobian(&w, y) - 1.0).abs() < 1e-12);
        let m = weyl_conjugate_y(&w, y).unwrap();
        let cl = weyl_conjugate_y_closed(&c, y).unwrap();
        for (p, q) in m.iter().zip(&cl) {
            prop_assert!((p / q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_gamma_recurrence(re in -8.0f64..8.0, im in -30.0f64..30.0) {
        let z = C::new(re, im);
        prop_assume!((z - z.re.round()).norm() > 1e-3 || z.re > 0.5);
        let d = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        let k = (d.im / std::f64::consts::TAU).round();
        prop_assert!(C::new(d.re, d.im - k * std::f64::consts::TAU).norm() < 1e-11);
    }

    #[test]
    fn gl2_shift_identity(t in -4.0f64..4.0, sr in 0.2f64..2.0, si in -4.0f64..4.0, delta in 0u32..=5) {
        let alpha = LanglandsParameter::tempered_from(&[t]);
        let rep = shift_identity_check(2, 1, delta, &alpha, &MellinPoint::new(vec![C::new(sr, si)])).unwrap();
        prop_assert!(rep.rel_error < 1e-12);
        prop_assert!(rep.degree_ok);
    }

    #[test]
    fn h_nonnegative(t1 in -20.0f64..20.0, t2 in -20.0f64..20.0, big_t in 1.0f64..30.0, r in 1u32..=3) {
        let params = TestFunctionParams::new(big_t, r, 3).unwrap();
        let h = h_value(&LanglandsParameter::tempered_from(&[t1, t2]), &params).unwrap();
        prop_assert!(h >= 0.0 && h.is_finite());
    }

    #[test]
    fn kloosterman_real_and_weil(c in 1i64..800) {
        let s = trace::kloosterman_gl2(1, 1, c).unwrap();
        prop_assert!(s.im.abs() < 1e-9);
        prop_assert!(s.norm() <= trace::divisor_count(c as u64) as f64 * (c as f64).sqrt() + 1e-9);
    }

    #[test]
    fn twisted_multiplicativity(c1 in 2i64..40, c2 in 2i64..40, m in -30i64..30, l in -30i64..30) {
        prop_assume!(num_integer::gcd(c1, c2) == 1);
        prop_assert!(trace::twisted_multiplicativity_error(m, l, c1, c2).unwrap() < 1e-10);
    }

    #[test]
    fn borel_divisor_sum_multiplicative(a in 1u64..40, b in 1u64..40, sr in -1.0f64..1.0, si in -3.0f64..3.0) {
        prop_assume!(num_integer::gcd(a, b) == 1);
        let s = C::new(sr, si);
        let f = [HeckeFactor::Unit, HeckeFactor::Unit];
        let v = |m| trace::hecke_divisor_sum(m, &[s, -s], &f).unwrap();
        let (ab, pa, pb) = (v(a * b), v(a), v(b));
        prop_assert!((ab - pa * pb).norm() <= 1e-10 * ab.norm().max(1.0));
    }

    #[test]
    fn cuspidal_ratio_scale_free(seed in 0u64..1000, scale in 0.01f64..100.0) {
        let forms = trace::synthetic_fixture(20, 12, 15.0, seed);
        let scaled: Vec<MaassFormRecord> = forms
            .iter()
            .map(|f| MaassFormRecord { adjoint_l: f.adjoint_l * scale, ..f.clone() })
            .collect();
        let params = TestFunctionParams::new(10.0, 1, 2).unwrap();
        let a = trace::cuspidal_sum(&forms, &params, 2, 3).unwrap();
        let b = trace::cuspidal_sum(&scaled, &params, 2, 3).unwrap();
        prop_assert!((a.ratio - b.ratio).abs() <= 1e-12 * a.ratio.abs().max(1e-3));
    }

    #[test]
    fn iwbounds_slack_nonpositive(n in 2usize..=12) {
        prop_assert!(trace::iwbounds_exponent(n, 1.5, None).unwrap().slack <= 0.0);
    }

    #[test]
    fn config_round_trip(seed in any::<u64>(), tol in 1e-14f64..1e-2, nodes in 2usize..64) {
        let text = format!("seed={seed}\nquad_tol={tol:e}\nnodes={nodes}\n");
        let cfg = RunConfig::parse_str(&text).unwrap();
        prop_assert_eq!(cfg.seed, seed);
        prop_assert_eq!(cfg.quad_tol, tol);
        prop_assert_eq!(cfg.nodes, nodes);
    }
}

#[test]
fn composition_counts() {
    for n in 1..=10 {
        assert_eq!(enumerate_compositions(n, 1).unwrap().len(), 1 << (n - 1));
    }
}

#[test]
fn maass_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("forms.csv");
    let forms = trace::synthetic_fixture(5, 10, 12.0, 3);
    trace::write_maass_csv(&forms, 10, &path).unwrap();
    let back = trace::ingest_maass_csv(&path).unwrap();
    assert!(back.warnings.is_empty());
    assert_eq!(back.records, forms);
}

#[test]
fn maass_csv_schema() {
    let one = trace::parse_maass_csv("r,lambda_1,lambda_2,adjoint_L\n9.5337,1.0,0.5,1.23\n", "t").unwrap();
    assert_eq!(one.records.len(), 1);
    assert_eq!(one.records[0].lambda(2), Some(0.5));
    assert!(trace::parse_maass_csv("", "t").unwrap().records.is_empty());
    match trace::parse_maass_csv("r,lambda_1,lambda_2,adjoint_L\n9.5,0.9,0.5,1.2\n", "t") {
        Err(kuznetsov::Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    let warn = trace::parse_maass_csv("r,lambda_2,lambda_3,lambda_4,lambda_5,lambda_6,adjoint_L\n3,0.5,0.5,0,0,0.9,1\n", "t").unwrap();
    assert_eq!(warn.warnings.len(), 1);
}

#[test]
fn scaling_csv_round_trip() {
    use kuznetsov::testfn::{Measure, ScalingFit};
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fit.csv");
    let fit = ScalingFit {
        measure: Measure::MainTerm { n: 2 },
        r: 1,
        t_grid: vec![32.0, 64.0, 128.0, 256.0],
        values: vec![1.0, 8.0, 64.0, 512.0],
        slope: 3.0,
        intercept: 0.0,
        predicted: 3.0,
        residual: 0.0,
        fit_residual: 0.0,
        stirling_predicted: None,
    };
    kuznetsov::suite::emit_scaling_csv(&fit, &path).unwrap();
    let rows = kuznetsov::suite::read_scaling_csv(&path).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3], (256.0, 512.0));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side["predicted"], 3.0);
    assert_eq!(side["formula"], "2R + 1");
}

#[test]
fn suite_is_deterministic() {
    use kuznetsov::suite::{run_suite, Selector};
    let cfg = RunConfig { seed: 7, ..RunConfig::default() };
    let a = kuznetsov::report::to_json(&run_suite(Selector::Geometry, &cfg).unwrap());
    let b = kuznetsov::report::to_json(&run_suite(Selector::Geometry, &cfg).unwrap());
    assert_eq!(a, b);
}
