//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kuznetsov::combinatorics::{self as comb, enumerate_compositions, Composition, ResidueSpec, Q};
use kuznetsov::geometry::{self as geo, IwasawaPoint, WeylElement};
use kuznetsov::quadrature::QuadConfig;
use kuznetsov::special::{lemmas, LanglandsParameter};
use kuznetsov::testfn::{self, Measure, TestFunctionParams};
use kuznetsov::trace;
use kuznetsov::whittaker::{self as wh, MellinPoint};
use kuznetsov::Error;

const SEED: u64 = 7;

const XI_TOL: f64 = 1e-10;
const GEOMETRY_TOL: f64 = 1e-12;
const GAMMA_TOL: f64 = 1e-9;
const SHIFT_TOL: f64 = 1e-12;
const RECURSION_TOL: f64 = 1e-6;
const RESIDUE_TOL: f64 = 1e-8;
const DECOMPOSITION_TOL: f64 = 1e-6;
const ITR_SLOPE_TOL: f64 = 0.15;
const MAIN_SLOPE_TOL_GL2: f64 = 0.1;
const MAIN_SLOPE_TOL_GL3: f64 = 0.3;
const TWIST_TOL: f64 = 1e-10;

type Outcome = Result<(bool, String), Error>;

fn rng(k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED * 1000 + k)
}

fn tempered(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> LanglandsParameter {
    let t: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-scale..scale)).collect();
    LanglandsParameter::tempered_from(&t)
}

fn separated(rng: &mut ChaCha8Rng, n: usize, scale: f64, sep: f64) -> LanglandsParameter {
    loop {
        let alpha = tempered(rng, n, scale);
        let a = alpha.entries();
        if (0..n).all(|i| (i + 1..n).all(|j| (a[i] - a[j]).norm() >= sep)) {
            return alpha;
        }
    }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let e = start.elapsed();
    (e <= limit, format!("{:.2}s (limit {}s)", e.as_secs_f64(), limit.as_secs()))
}

fn c1() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    for n in 2..=12 {
        let f = comb::degree_forms(n)?;
        ok &= f.pair_sum == f.central;
    }
    let small = [comb::degree_d(2)?, comb::degree_d(3)?, comb::degree_d(4)?];
    ok &= small == [0, 3, 21];
    let (fast, t) = within(start, Duration::from_secs(1));
    Ok((ok && fast, format!("forms agree n=2..12: {ok}; D(2),D(3),D(4) = {small:?}; {t}")))
}

fn c2() -> Outcome {
    let start = Instant::now();
    let rep = comb::verify_partition_identities(10)?;
    let (fast, t) = within(start, Duration::from_secs(3));
    Ok((rep.pass && fast, format!("{} compositions, counterexample {:?}; {t}", rep.checked, rep.counterexample)))
}

fn c3() -> Outcome {
    let rep = comb::verify_phi_properties(9)?;
    let ok = rep.permutation_invariant && rep.minimum_ok && rep.refinement_ok;
    Ok((
        ok,
        format!(
            "{} compositions; invariant {}, minimum {}, refinement {}",
            rep.checked, rep.permutation_invariant, rep.minimum_ok, rep.refinement_ok
        ),
    ))
}

fn c4() -> Outcome {
    let rhos = [Q::new(-1, 2), Q::new(1, 2), Q::new(3, 2), Q::new(5, 2)];
    let rep = comb::verify_even_odd(10, &rhos)?;
    Ok((
        rep.closed_form_mismatches == 0,
        format!(
            "{} of {} (composition, rho) pairs differ from the closed form, first {:?}; lower bound violations {}",
            rep.closed_form_mismatches, rep.checked, rep.first_mismatch, rep.lower_bound_violations
        ),
    ))
}

fn c5() -> Outcome {
    let mut r = rng(5);
    let w = WeylElement::long(4);
    let pattern = w.ubar_pattern();
    let mut xi_err = 0.0f64;
    for _ in 0..100 {
        let mut x = nalgebra::DMatrix::identity(4, 4);
        for &(i, j) in &pattern {
            x[(i, j)] = r.gen_range(-2.0..2.0);
        }
        let xi = geo::xi_values(&w, &IwasawaPoint::unipotent(x.clone()))?;
        for (a, b) in xi.iter().zip(geo::xi_long_gl4(&x).iter()) {
            xi_err = xi_err.max((a - b).abs() / b);
        }
    }
    let mut geo_err = 0.0f64;
    for n in 2..=6 {
        for c in enumerate_compositions(n, 2)? {
            let w = WeylElement::relevant(&c)?;
            let y: Vec<f64> = (0..n - 1).map(|_| r.gen_range(0.2..3.0)).collect();
            let a: Vec<f64> = (0..n - 1).map(|_| r.gen_range(-2.0..2.0)).collect();
            let m = geo::weyl_conjugate_y(&w, &y)?;
            let cl = geo::weyl_conjugate_y_closed(&c, &y)?;
            for (p, q) in m.iter().zip(&cl) {
                geo_err = geo_err.max((p / q - 1.0).abs());
            }
            let direct = geo::norm_power(&m, &a);
            geo_err = geo_err.max((geo::conjugated_norm_power(&c, &y, &a) / direct - 1.0).abs());
            geo_err = geo_err.max((geo::delta_w(&w, &y) / geo::delta_w_jacobian(&w, &y) - 1.0).abs());
        }
    }
    Ok((
        xi_err <= XI_TOL && geo_err <= GEOMETRY_TOL,
        format!("xi max rel err {xi_err:.2e} (tol {XI_TOL:e}); conjugation/delta_w max rel err {geo_err:.2e} (tol {GEOMETRY_TOL:e})"),
    ))
}

fn c6() -> Outcome {
    let mut r = rng(6);
    let mut done = 0;
    let mut failures = 0;
    let mut worst = 0.0f64;
    while done < 1000 {
        let n = r.gen_range(2..=6);
        let alpha = tempered(&mut r, n, 3.0);
        let all = enumerate_compositions(n, 1)?;
        let c = all[r.gen_range(0..all.len())].clone();
        let rr = r.gen_range(1..=3);
        match lemmas::verify_gamma_decompositions(&alpha, &c, rr) {
            Ok(rep) => {
                done += 1;
                worst = worst.max(rep.log_modulus_error).max(rep.product_error).max(rep.fr_numeric_error);
                failures += !rep.passes(GAMMA_TOL) as usize;
            }
            Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let mut exact_bad = 0;
    for _ in 0..1000 {
        let n = r.gen_range(2..=6);
        let all = enumerate_compositions(n, 1)?;
        let c = all[r.gen_range(0..all.len())].clone();
        let mut beta: Vec<Q> = (0..c.r()).map(|_| Q::new(r.gen_range(-40..40), r.gen_range(1..12))).collect();
        let s: Q = beta.iter().sum();
        beta[0] -= s;
        let (lhs, rhs) = lemmas::extra_gamma_sum(&beta, &c)?;
        exact_bad += (lhs != rhs) as usize;
    }
    Ok((
        failures == 0 && exact_bad == 0,
        format!("numeric: {failures} failures, worst {worst:.2e} (tol {GAMMA_TOL:e}); rational: {exact_bad} mismatches"),
    ))
}

fn c7() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    let mut degrees = true;
    for _ in 0..100 {
        let alpha = tempered(&mut r, 2, 4.0);
        let s = MellinPoint::new(vec![C::new(r.gen_range(0.3..2.0), r.gen_range(-4.0..4.0))]);
        for delta in 0..=5 {
            let rep = wh::shift_identity_check(2, 1, delta, &alpha, &s)?;
            worst = worst.max(rep.rel_error);
            degrees &= rep.degree_ok;
        }
    }
    for _ in 0..20 {
        let alpha = tempered(&mut r, 3, 3.0);
        let s = MellinPoint::new(vec![
            C::new(r.gen_range(0.3..2.0), r.gen_range(-3.0..3.0)),
            C::new(r.gen_range(0.3..2.0), r.gen_range(-3.0..3.0)),
        ]);
        for m in 1..=2 {
            for delta in 0..=3 {
                degrees &= wh::shift_identity_check(3, m, delta, &alpha, &s)?.degree_ok;
            }
        }
    }
    Ok((worst <= SHIFT_TOL && degrees, format!("GL(2) max rel err {worst:.2e} (tol {SHIFT_TOL:e}); degree ledger n=2,3: {degrees}")))
}

fn c8() -> Outcome {
    let start = Instant::now();
    let mut r = rng(8);
    let kappa = wh::calibrate_kappa3(&QuadConfig::default())?;
    let mut worst = 0.0f64;
    let mut perm_worst = 0.0f64;
    for _ in 0..20 {
        let alpha = tempered(&mut r, 3, 3.0);
        let s = MellinPoint::new(vec![C::new(0.75, r.gen_range(-3.0..3.0)), C::new(0.75, r.gen_range(-3.0..3.0))]);
        let rec = wh::mellin_recursive(3, &alpha, &s, 1e-10)?.value;
        let closed = wh::mellin_gl3_closed(&alpha, &s, kappa)?;
        worst = worst.max((rec / closed - 1.0).norm());
        let swapped = wh::mellin_recursive(3, &alpha.permuted(&[2, 0, 1]), &s, 1e-10)?.value;
        perm_worst = perm_worst.max((swapped / rec - 1.0).norm());
    }
    let (fast, t) = within(start, Duration::from_secs(120));
    Ok((
        worst <= RECURSION_TOL && perm_worst <= RECURSION_TOL && fast,
        format!("kappa_3 = {:.12}; max rel err {worst:.2e}, permutation {perm_worst:.2e} (tol {RECURSION_TOL:e}); {t}", kappa.re),
    ))
}

fn c9() -> Outcome {
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let alpha = separated(&mut r, 2, 2.0, 0.2);
        for delta in 0..=3 {
            let spec = ResidueSpec::new(Composition::new(vec![1, 1])?, vec![delta])?;
            let f = wh::residue_formula(2, &spec, &alpha, &[])?;
            let o = wh::residue_contour(2, &spec, &alpha, &[], 0.1)?;
            worst = worst.max((f - o).norm() / f.norm());
        }
        let alpha = separated(&mut r, 3, 2.0, 0.2);
        for m in 1..=2 {
            let rest = C::new(r.gen_range(0.3..1.0), r.gen_range(-1.0..1.0));
            let spec = ResidueSpec::new(Composition::new(vec![m, 3 - m])?, vec![0])?;
            let f = wh::residue_formula(3, &spec, &alpha, &[rest])?;
            let o = wh::residue_contour(3, &spec, &alpha, &[rest], 0.1)?;
            worst = worst.max((f - o).norm() / f.norm());
        }
    }
    Ok((worst <= RESIDUE_TOL, format!("max rel err {worst:.2e} (tol {RESIDUE_TOL:e})")))
}

fn c10() -> Outcome {
    let params = TestFunctionParams::new(4.0, 2, 2)?;
    let ys: Vec<f64> = (0..10).map(|k| 0.2 + 0.2 * k as f64).collect();
    let rep = testfn::verify_decomposition(&params, 1.5, 0.5, &ys, &QuadConfig::default().with_tol(1e-10))?;
    Ok((
        rep.max_rel_residual <= DECOMPOSITION_TOL,
        format!(
            "T=4, R=2, shift 1.5, 10 y-points: fitted kappa = {:.6}{:+.2e}i, max residual {:.2e} (tol {DECOMPOSITION_TOL:e})",
            rep.kappa.re, rep.kappa.im, rep.max_rel_residual
        ),
    ))
}

fn c11() -> Outcome {
    let start = Instant::now();
    let cfg = QuadConfig::default().with_tol(1e-8);
    let mut ok = true;
    let mut below = true;
    let mut parts = Vec::new();
    for a in [0.25, 0.75, 1.25] {
        let fit = testfn::fit_scaling(Measure::ITr { a }, 2, &[16.0, 32.0, 64.0, 128.0], &cfg)?;
        ok &= fit.residual <= ITR_SLOPE_TOL;
        below &= fit.slope <= fit.predicted + ITR_SLOPE_TOL;
        parts.push(format!(
            "a={a}: slope {:.3} vs {:.3} (|diff| {:.3}; Stirling {:.3})",
            fit.slope,
            fit.predicted,
            fit.residual,
            fit.stirling_predicted.unwrap_or(f64::NAN)
        ));
    }
    let (fast, t) = within(start, Duration::from_secs(300));
    Ok((ok && fast, format!("{}; tol {ITR_SLOPE_TOL}; upper bound respected: {below}; {t}", parts.join("; "))))
}

fn c12() -> Outcome {
    let cfg = QuadConfig::default().with_tol(1e-8);
    let grid = [32.0, 64.0, 128.0, 256.0];
    let f2 = testfn::fit_scaling(Measure::MainTerm { n: 2 }, 1, &grid, &cfg)?;
    let f3 = testfn::fit_scaling(Measure::MainTerm { n: 3 }, 1, &grid, &cfg)?;
    Ok((
        f2.residual <= MAIN_SLOPE_TOL_GL2 && f3.residual <= MAIN_SLOPE_TOL_GL3,
        format!(
            "R=1: n=2 slope {:.4} vs {} (tol {MAIN_SLOPE_TOL_GL2}); n=3 slope {:.4} vs {} (tol {MAIN_SLOPE_TOL_GL3})",
            f2.slope, f2.predicted, f3.slope, f3.predicted
        ),
    ))
}

fn c13() -> Outcome {
    let exact = [trace::kloosterman_gl2(1, 1, 1)?, trace::kloosterman_gl2(1, 1, 2)?, trace::kloosterman_gl2(1, 1, 3)?];
    let exact_ok = trace::kloosterman_phase_counts(1, 1, 1) == vec![1]
        && (exact[0] - 1.0).norm() < 1e-15
        && (exact[1] - 1.0).norm() < 1e-15
        && (exact[2] + 1.0).norm() < 1e-15;
    let sweep = trace::weil_sweep(5000)?;
    let weil_ok = sweep.weil_violations.is_empty() && sweep.trivial_violations.is_empty();
    let mut r = rng(13);
    let mut twist = 0.0f64;
    let mut done = 0;
    while done < 200 {
        let (a, b) = (r.gen_range(2..80), r.gen_range(2..80));
        if num_integer::gcd(a, b) != 1 {
            continue;
        }
        done += 1;
        twist = twist.max(trace::twisted_multiplicativity_error(r.gen_range(-50..50), r.gen_range(-50..50), a, b)?);
    }
    Ok((
        exact_ok && weil_ok && twist <= TWIST_TOL,
        format!(
            "S(1,1;1..3) = {:.0}, {:.0}, {:.0}; Weil violations c<=5000: {}; max |S|/(d(c)sqrt c) {:.4}; twisted err {twist:.2e}",
            exact[0].re,
            exact[1].re,
            exact[2].re,
            sweep.weil_violations.len(),
            sweep.max_weil_ratio
        ),
    ))
}

fn c14() -> Outcome {
    let lm = trace::iwbounds_exponent(4, 1.5, None)?.lm_exponent;
    let mut slack_ok = true;
    for n in 2..=12 {
        slack_ok &= trace::iwbounds_exponent(n, 1.5, None)?.slack <= 0.0;
    }
    let mut ab_ok = true;
    let mut rows = 0;
    for n in 2..=7 {
        for rho in [1.5, 2.5] {
            let rep = trace::verify_aplusb(n, rho, None, 1e-4, 0.01)?;
            rows += rep.rows.len();
            ab_ok &= rep.all_hold;
        }
    }
    Ok((
        lm == 29.0 / 4.0 && slack_ok && ab_ok,
        format!("(lm)-exponent at n=4: {lm}; slack <= 0 for n<=12: {slack_ok}; a+b inequality, rho in {{3/2, 5/2}}, {rows} rows: {ab_ok}"),
    ))
}

fn c15() -> Outcome {
    let forms = trace::synthetic_fixture(50, 30, 40.0, SEED);
    let params = TestFunctionParams::new(20.0, 1, 2)?;
    let diag = trace::cuspidal_sum(&forms, &params, 2, 2)?;
    let off = trace::cuspidal_sum(&forms, &params, 2, 3)?;
    let bound = 3.0 / 50f64.sqrt();
    let mut detail = format!("synthetic (non-physical): diagonal ratio {}, off-diagonal {:.4} (bound {bound:.4})", diag.ratio, off.ratio);
    if let Some(path) = std::env::var_os("KUZNETSOV_MAASS_CSV") {
        let data = trace::ingest_maass_csv(std::path::Path::new(&path))?;
        let real = trace::cuspidal_sum(&data.records, &params, 2, 3)?;
        detail.push_str(&format!("; supplied data: {} forms, ratio {:.4}, {} warnings", real.used, real.ratio, data.warnings.len()));
    }
    Ok((diag.ratio == 1.0 && off.ratio.abs() <= bound, detail))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 15] = [
        ("degree closed forms", c1),
        ("composition sum identities", c2),
        ("Phi invariance and minimum", c3),
        ("even/odd closed forms", c4),
        ("xi polynomials, conjugated y, delta_w", c5),
        ("Gamma_R / F_R decompositions", c6),
        ("shift identity and degree ledger", c7),
        ("GL(3) recursion", c8),
        ("residue formula", c9),
        ("p(y) contour decomposition", c10),
        ("I_TR slopes", c11),
        ("main-term slopes", c12),
        ("Kloosterman sums", c13),
        ("exponent calculators", c14),
        ("orthogonality smoke test", c15),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "criterion {:>2} [{name}]: {} ({detail}) [{:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 15 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
