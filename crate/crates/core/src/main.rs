use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use kuznetsov::combinatorics::{self as comb, Composition, ContourShift, ResidueSpec, Q};
use kuznetsov::config::{OutputFormat, RunConfig};
use kuznetsov::geometry::{self as geo, IwasawaPoint, WeylElement};
use kuznetsov::special::{self, LanglandsParameter};
use kuznetsov::suite::{self, Selector};
use kuznetsov::testfn::{self, Measure, TestFunctionParams};
use kuznetsov::whittaker::{self as wh, MellinPoint, WhittakerEvaluator};
use kuznetsov::{report, trace, Error, Result};

type C = Complex64;

#[derive(Parser)]
#[command(name = "kuznetsov-lab", version, about = "Checks and numerics around the GL(n) Kuznetsov trace formula")]
struct Cli {
    /// Config file of key=value lines (default: $KUZNETSOV_LAB_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Include runtimes in suite reports.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    Combinatorics(CombArgs),
    Geometry(GeoArgs),
    Special(SpecialArgs),
    Whittaker(WhArgs),
    Testfn(TestFnArgs),
    Trace(TraceArgs),
    /// Run the verifier suite: combinatorics|geometry|special|whittaker|testfn|trace|all.
    Suite { selector: String },
}

#[derive(Args)]
struct CombArgs {
    #[arg(long)]
    dn: Option<usize>,
    /// Composition, e.g. 2,1,3.
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    verify_lemmas: Option<usize>,
}

#[derive(Args)]
struct GeoArgs {
    /// Composition for w and a JSON file holding the n x n unipotent u.
    #[arg(long, num_args = 2, value_names = ["W", "U_JSON"])]
    xi: Option<Vec<String>>,
    /// Composition for w and comma-separated y.
    #[arg(long, num_args = 2, value_names = ["W", "Y"])]
    conj_y: Option<Vec<String>>,
}

#[derive(Args)]
struct SpecialArgs {
    #[arg(long, num_args = 3, value_names = ["N", "R", "ALPHA_JSON"])]
    fr: Option<Vec<String>>,
    #[arg(long, allow_hyphen_values = true)]
    bound_b: Option<f64>,
}

#[derive(Args)]
struct WhArgs {
    #[arg(long, num_args = 3, value_names = ["N", "ALPHA_JSON", "S_JSON"])]
    mellin: Option<Vec<String>>,
    #[arg(long, num_args = 3, value_names = ["N", "M", "DELTA"])]
    residue: Option<Vec<usize>>,
    #[arg(long, num_args = 3, value_names = ["N", "M", "DELTA"])]
    check_shift: Option<Vec<usize>>,
    /// Langlands parameter (JSON) for --residue/--check-shift.
    #[arg(long)]
    alpha: Option<PathBuf>,
    /// Remaining Mellin variables (JSON) for --residue/--check-shift.
    #[arg(long)]
    s: Option<PathBuf>,
}

#[derive(Args)]
struct TestFnArgs {
    #[arg(long)]
    p_sharp: bool,
    #[arg(long)]
    h: bool,
    /// p(y) at the given y (n = 2).
    #[arg(long)]
    p_y: Option<f64>,
    #[arg(long, num_args = 4, value_names = ["R", "A", "TMIN", "TMAX"], allow_hyphen_values = true)]
    itr_scaling: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["N", "R"])]
    main_term_scaling: Option<Vec<u32>>,
    #[arg(long)]
    alpha: Option<PathBuf>,
    #[arg(short = 'T', long, default_value_t = 10.0)]
    t: f64,
    #[arg(short = 'R', long, default_value_t = 1)]
    r: u32,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Contour shift a for --p-y (line Re s = -a).
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    shift: f64,
    /// Write the scaling CSV (and a .json sidecar) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long, num_args = 3, value_names = ["M", "L", "C"], allow_hyphen_values = true)]
    kloosterman: Option<Vec<i64>>,
    #[arg(long)]
    kloosterman_sweep: Option<i64>,
    #[arg(long, num_args = 3, value_names = ["RHO", "EPS", "CMAX"])]
    tail: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["N", "RHO"])]
    exponents: Option<Vec<f64>>,
    #[arg(long, num_args = 5, value_names = ["CSV", "T", "R", "L", "M"])]
    cuspidal: Option<Vec<String>>,
}

/// A command's output and whether it counts as a pass.
struct Outcome {
    value: Value,
    pass: bool,
}

fn ok(value: Value) -> Result<Outcome> {
    Ok(Outcome { value, pass: true })
}

fn bad(msg: &str) -> Error {
    Error::Domain(msg.into())
}

fn parse_composition(s: &str) -> Result<Composition> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad(&format!("bad composition {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Composition::new(parts)
}

/// JSON numbers or [re, im] pairs.
fn complex_vec(v: &Value) -> Result<Vec<C>> {
    let arr = v.as_array().ok_or_else(|| bad("expected a JSON array"))?;
    arr.iter()
        .map(|e| match e {
            Value::Number(x) => Ok(C::new(x.as_f64().unwrap(), 0.0)),
            Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                (Some(a), Some(b)) => Ok(C::new(a, b)),
                _ => Err(bad("expected [re, im]")),
            },
            _ => Err(bad("expected a number or [re, im]")),
        })
        .collect()
}

fn read_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })
}

fn read_alpha(path: &Path) -> Result<LanglandsParameter> {
    LanglandsParameter::new(complex_vec(&read_json(path)?)?)
}

fn cj(z: C) -> Value {
    json!([z.re, z.im])
}

fn default_alpha(n: usize) -> LanglandsParameter {
    let t = [0.4, 1.1, -0.7];
    LanglandsParameter::tempered_from(&t[..n - 1])
}

fn combinatorics(a: CombArgs) -> Result<Outcome> {
    if let Some(n) = a.dn {
        let f = comb::degree_forms(n)?;
        return Ok(Outcome {
            value: json!({"input": n, "value": f.pair_sum.to_string(), "oracle_value": f.central.to_string(), "pass": f.pair_sum == f.central}),
            pass: f.pair_sum == f.central,
        });
    }
    if let Some(s) = a.phi {
        let c = parse_composition(&s)?;
        let v = comb::phi(&c)?;
        let oracle = comb::phi(&c.reversed())?;
        let min = Q::from_integer((c.n() * (c.n() - 1) / 2) as i64);
        let pass = v == oracle && v >= min;
        return Ok(Outcome {
            value: json!({"input": c.to_string(), "value": v.to_string(), "oracle_value": oracle.to_string(), "pass": pass}),
            pass,
        });
    }
    if let Some(n) = a.verify_lemmas {
        let ids = comb::verify_partition_identities(n)?;
        let phi = comb::verify_phi_properties(n)?;
        let rhos = [Q::new(-1, 2), Q::new(1, 2), Q::new(3, 2), Q::new(5, 2)];
        let eo = comb::verify_even_odd(n, &rhos)?;
        let pass = ids.pass && phi.permutation_invariant && phi.minimum_ok && phi.refinement_ok && eo.closed_form_mismatches == 0;
        return Ok(Outcome {
            value: json!({"input": n, "identities": ids, "phi": phi, "even_odd": eo, "pass": pass}),
            pass,
        });
    }
    Err(bad("combinatorics needs --dn, --phi or --verify-lemmas"))
}

fn geometry(a: GeoArgs) -> Result<Outcome> {
    if let Some(v) = a.xi {
        let c = parse_composition(&v[0])?;
        let w = WeylElement::relevant(&c)?;
        let rows: Vec<Vec<f64>> = serde_json::from_value(read_json(Path::new(&v[1]))?).map_err(|e| bad(&e.to_string()))?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) || n != c.n() {
            return Err(bad("u must be an n x n matrix matching w"));
        }
        let x = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let xi = geo::xi_values(&w, &IwasawaPoint::unipotent(x))?;
        return ok(json!({"w": c.to_string(), "xi": xi}));
    }
    if let Some(v) = a.conj_y {
        let c = parse_composition(&v[0])?;
        let y = v[1]
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("bad y entry")))
            .collect::<Result<Vec<_>>>()?;
        let w = WeylElement::relevant(&c)?;
        let m = geo::weyl_conjugate_y(&w, &y)?;
        let cl = geo::weyl_conjugate_y_closed(&c, &y)?;
        let err = m.iter().zip(&cl).map(|(p, q)| (p / q - 1.0).abs()).fold(0.0, f64::max);
        return Ok(Outcome {
            value: json!({"w": c.to_string(), "y": y, "value": cl, "matrix_value": m, "max_rel_error": err}),
            pass: err <= 1e-12,
        });
    }
    Err(bad("geometry needs --xi or --conj-y"))
}

fn special_cmd(a: SpecialArgs) -> Result<Outcome> {
    if let Some(v) = a.fr {
        let n: usize = v[0].parse().map_err(|_| bad("bad n"))?;
        let r: u32 = v[1].parse().map_err(|_| bad("bad R"))?;
        let alpha = read_alpha(Path::new(&v[2]))?;
        if alpha.n() != n {
            return Err(bad("alpha has the wrong length"));
        }
        let f = special::f_r_poly(&alpha, r);
        return ok(json!({"n": n, "R": r, "value": cj(f), "factors": testfn::f_r_factor_count(n)}));
    }
    if let Some(x) = a.bound_b {
        return ok(json!({"a": x, "B": special::bound_b_ext(x), "stirling": special::stirling_saving(x)}));
    }
    Err(bad("special needs --fr or --bound-b"))
}

fn whittaker(a: WhArgs, cfg: &RunConfig) -> Result<Outcome> {
    if let Some(v) = a.mellin {
        let n: usize = v[0].parse().map_err(|_| bad("bad n"))?;
        let alpha = read_alpha(Path::new(&v[1]))?;
        let s = MellinPoint::new(complex_vec(&read_json(Path::new(&v[2]))?)?);
        if alpha.n() != n {
            return Err(bad("alpha has the wrong length"));
        }
        let mut ev = WhittakerEvaluator::new(alpha)?.with_tol(cfg.quad_tol)?.with_nodes(cfg.nodes);
        if cfg.truncation > 0.0 {
            ev.lambda = Some(cfg.truncation);
        }
        let r = ev.eval(&s)?;
        return ok(json!({"value": cj(r.value), "error": r.error, "nodes": r.nodes}));
    }
    let alpha_for = |n: usize| -> Result<LanglandsParameter> {
        match &a.alpha {
            Some(p) => read_alpha(p),
            None => Ok(default_alpha(n)),
        }
    };
    let s_for = |len: usize| -> Result<Vec<C>> {
        match &a.s {
            Some(p) => complex_vec(&read_json(p)?),
            None => Ok(vec![C::new(0.75, 0.25); len]),
        }
    };
    if let Some(v) = a.residue {
        let (n, m, delta) = (v[0], v[1], v[2] as u32);
        if m == 0 || m >= n {
            return Err(bad("need 1 <= m <= n-1"));
        }
        let spec = ResidueSpec::new(Composition::new(vec![m, n - m])?, vec![delta])?;
        let alpha = alpha_for(n)?;
        let rest = s_for(n - 2)?;
        let f = wh::residue_formula(n, &spec, &alpha, &rest)?;
        let o = wh::residue_contour(n, &spec, &alpha, &rest, 0.1)?;
        let err = (f - o).norm() / f.norm();
        return Ok(Outcome {
            value: json!({"location": cj(wh::residue_location(&alpha, m, delta)), "value": cj(f), "contour": cj(o), "rel_error": err}),
            pass: err <= 1e-8,
        });
    }
    if let Some(v) = a.check_shift {
        let (n, m, delta) = (v[0], v[1], v[2] as u32);
        let alpha = alpha_for(n)?;
        let s = MellinPoint::new(s_for(n - 1)?);
        let rep = wh::shift_identity_check(n, m, delta, &alpha, &s)?;
        let pass = rep.rel_error <= cfg.identity_tol && rep.degree_ok;
        return Ok(Outcome {
            value: json!({"lhs": cj(rep.lhs), "rhs": cj(rep.rhs), "rel_error": rep.rel_error, "degree_target": rep.degree_target, "terms": rep.terms, "degree_ok": rep.degree_ok}),
            pass,
        });
    }
    Err(bad("whittaker needs --mellin, --residue or --check-shift"))
}

fn t_grid(tmin: f64, tmax: f64) -> Result<Vec<f64>> {
    if !(tmin >= 1.0 && tmax > tmin) {
        return Err(bad("need 1 <= Tmin < Tmax"));
    }
    let k = ((tmax / tmin).log2().round() as usize).max(3);
    Ok((0..=k).map(|i| tmin * (tmax / tmin).powf(i as f64 / k as f64)).collect())
}

fn fit_output(fit: testfn::ScalingFit, out: &Option<PathBuf>, slope_tol: f64) -> Result<Outcome> {
    if let Some(p) = out {
        suite::emit_scaling_csv(&fit, p)?;
    }
    let pass = fit.residual <= slope_tol;
    let rows: Vec<Value> = fit
        .t_grid
        .iter()
        .zip(&fit.values)
        .map(|(t, v)| json!({"T": t, "value": v, "log_value": v.ln()}))
        .collect();
    Ok(Outcome {
        value: json!({"slope": fit.slope, "predicted": fit.predicted, "stirling_predicted": fit.stirling_predicted, "residual": fit.residual, "fit_residual": fit.fit_residual, "data": rows}),
        pass,
    })
}

fn testfn_cmd(a: TestFnArgs, cfg: &RunConfig) -> Result<Outcome> {
    let quad = cfg.quad();
    if let Some(v) = &a.itr_scaling {
        let fit = testfn::fit_scaling(Measure::ITr { a: v[1] }, v[0] as u32, &t_grid(v[2], v[3])?, &quad.clone().with_tol(quad.tol.max(1e-8)))?;
        return fit_output(fit, &a.out, cfg.slope_tol);
    }
    if let Some(v) = &a.main_term_scaling {
        let fit = testfn::fit_scaling(Measure::MainTerm { n: v[0] as usize }, v[1], &[32.0, 64.0, 128.0, 256.0], &quad)?;
        let tol = if v[0] == 2 { 0.1 } else { 0.3 };
        return fit_output(fit, &a.out, tol);
    }
    let params = TestFunctionParams::new(a.t, a.r, a.n)?;
    let alpha = match &a.alpha {
        Some(p) => read_alpha(p)?,
        None => default_alpha(a.n),
    };
    if a.p_sharp {
        return ok(json!({"value": cj(testfn::p_sharp(&alpha, &params)?)}));
    }
    if a.h {
        return ok(json!({"value": testfn::h_value(&alpha, &params)?}));
    }
    if let Some(y) = a.p_y {
        let v = testfn::p_y(&[y], &params, &ContourShift::new(vec![a.shift])?, &quad)?;
        return ok(json!({"y": y, "value": cj(v.value), "evaluations": v.evaluations}));
    }
    Err(bad("testfn needs --p-sharp, --h, --p-y, --itr-scaling or --main-term-scaling"))
}

fn trace_cmd(a: TraceArgs) -> Result<Outcome> {
    if let Some(v) = a.kloosterman {
        let s = trace::kloosterman_gl2(v[0], v[1], v[2])?;
        return ok(json!({"m": v[0], "l": v[1], "c": v[2], "value": cj(s)}));
    }
    if let Some(c) = a.kloosterman_sweep {
        let w = trace::weil_sweep(c)?;
        let pass = w.weil_violations.is_empty() && w.trivial_violations.is_empty();
        return Ok(Outcome { value: serde_json::to_value(&w).unwrap(), pass });
    }
    if let Some(v) = a.tail {
        let rep = trace::kloosterman_tail_rho(v[0], v[1], v[2] as i64)?;
        return ok(serde_json::to_value(&rep).unwrap());
    }
    if let Some(v) = a.exponents {
        let (n, rho) = (v[0] as usize, v[1]);
        let rep = trace::iwbounds_exponent(n, rho, None)?;
        let ab = trace::verify_aplusb(n, rho, None, 1e-4, 0.01)?;
        let pass = ab.all_hold;
        return Ok(Outcome {
            value: json!({"exponents": rep, "aplusb": ab}),
            pass,
        });
    }
    if let Some(v) = a.cuspidal {
        let data = trace::ingest_maass_csv(Path::new(&v[0]))?;
        let num = |i: usize| v[i].parse::<f64>().map_err(|_| bad("bad number"));
        let params = TestFunctionParams::new(num(1)?, num(2)? as u32, 2)?;
        let s = trace::cuspidal_sum(&data.records, &params, num(3)? as u64, num(4)? as u64)?;
        return ok(json!({"sum": s, "warnings": data.warnings, "records": data.records.len()}));
    }
    Err(bad("trace needs one of --kloosterman, --kloosterman-sweep, --tail, --exponents, --cuspidal"))
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::String(s) => out.push((prefix.into(), s.clone())),
        _ => out.push((prefix.into(), v.to_string())),
    }
}

fn to_csv(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).unwrap();
    for (k, x) in rows {
        w.write_record([k, x]).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::from_env()?,
    };
    if let Some(f) = &cli.format {
        cfg.format = f.parse()?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.quad_tol = t;
    }
    if let Some(n) = cli.nodes {
        cfg.nodes = n;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    cfg.timings |= cli.timings;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = build_config(&cli)?;
    if cfg.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    if let Cmd::Suite { selector } = &cli.cmd {
        let sel: Selector = selector.parse()?;
        let reps = suite::run_suite(sel, &cfg)?;
        match cfg.format {
            OutputFormat::Json => println!("{}", report::to_json(&reps)),
            OutputFormat::Csv => print!("{}", report::to_csv(&reps)),
        }
        return Ok(reps.iter().all(|r| r.pass));
    }
    let out = match cli.cmd {
        Cmd::Combinatorics(a) => combinatorics(a)?,
        Cmd::Geometry(a) => geometry(a)?,
        Cmd::Special(a) => special_cmd(a)?,
        Cmd::Whittaker(a) => whittaker(a, &cfg)?,
        Cmd::Testfn(a) => testfn_cmd(a, &cfg)?,
        Cmd::Trace(a) => trace_cmd(a)?,
        Cmd::Suite { .. } => unreachable!(),
    };
    match cfg.format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&out.value).unwrap()),
        OutputFormat::Csv => print!("{}", to_csv(&out.value)),
    }
    Ok(out.pass)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
