//! One handler per subcommand. Each writes its files through the
//! [`OutputDir`], prints a summary table and returns the exit code.

use std::path::Path;

use depsketch_core::complexity::{
    complexity_report, deviation_bound, BoundVariant, ComplexityReport, DeviationBound, MatrixSetDescriptor,
    TailEvaluation,
};
use depsketch_core::graph::{
    build_gm_template, factorization_check, verify_dts, verify_sp2, CiQuery, FactorizationReport, Sp2Report, Varrho,
};
use depsketch_core::processes::{sample_dependent_matrix_at, sample_path_at, sample_with_tangent_at};
use depsketch_core::rng::{derive_seed, stream};
use depsketch_core::transforms::{build_countsketch_with, build_toeplitz};
use depsketch_core::verify::{
    bandit_min_eig_experiment, check_contraction, check_decoupling, check_offdiag_zero, check_symmetrization,
    check_tangent_equivalence, estimate_cbd, rip_constant, rip_scaling, BanditConfig, RipEstimate, RipMode,
    RipScaling, SketchSpec, TrialReport,
};
use depsketch_core::{Executor, Matrix};
use serde::Serialize;

use super::args::*;
use super::table::{fmt, Table};
use crate::experiments::{bipartite_mask, countsketch_check, jl_sweep, random_bset, random_points, toeplitz_fft_check};
use crate::formats::csv::{self as csvf, num};
use crate::formats::{load_toml, parse_dag, parse_matrices, parse_operator, parse_query, to_toml, write_dag};
use crate::formats::{write_matrices, write_operator, FloatStyle};
use crate::manifest::OutputDir;
use crate::{Error, Parallel, Result};

pub fn dispatch(command: &Command, seed: u64, exec: &Parallel, out: &mut OutputDir) -> Result<i32> {
    match command {
        Command::Dsep(a) => dsep(a, seed, out),
        Command::Gen(a) => gen(a, seed, exec, out),
        Command::Width(a) => width(a, seed, exec, out),
        Command::Bound(a) => bound(a, seed, exec, out),
        Command::Jl(a) => jl(a, seed, exec, out),
        Command::Rip(a) => rip(a, seed, exec, out),
        Command::Toeplitz(a) => toeplitz(a, seed, out),
        Command::Countsketch(a) => countsketch(a, seed, exec, out),
        Command::Bandit(a) => bandit(a, seed, exec, out),
        Command::Verify(v) => verify(v, seed, exec, out),
        Command::Apply(a) => apply(a, out),
        Command::Replay(_) => Err(Error::Usage("replay cannot be nested".into())),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn code(passed: bool) -> i32 {
    if passed {
        0
    } else {
        2
    }
}

fn print_report(report: &TrialReport) {
    let mut t = Table::new(
        format!("{} ({} trials, seed {:#x}{})", report.quantity, report.trials, report.seed, if report.escalated { ", escalated" } else { "" }),
        &["check", "statistic", "std_error", "threshold", "verdict"],
    );
    for c in &report.checks {
        t.row(vec![c.name.clone(), fmt(c.statistic), fmt(c.std_error), fmt(c.threshold), c.verdict.as_str().into()]);
    }
    t.print();
    say!("verdict: {}", report.verdict.as_str());
}

/// `<base>.json`, `<base>.csv` (long format) and `<base>_checks.csv`.
fn emit_report(out: &mut OutputDir, base: &str, report: &TrialReport) -> Result<()> {
    out.write_json(&format!("{base}.json"), report)?;
    out.write(&format!("{base}.csv"), &csvf::report_long(&[report])?)?;
    out.write(&format!("{base}_checks.csv"), &csvf::checks(&[report])?)?;
    print_report(report);
    Ok(())
}

#[derive(Serialize)]
struct QueryResult {
    query: CiQuery,
    text: String,
    separated: bool,
}

#[derive(Serialize)]
struct DsepOutput {
    nodes: usize,
    varrho: Varrho,
    queries: Vec<QueryResult>,
    sp2: Option<Sp2Report>,
    dts: Option<Sp2Report>,
    factorization: Option<FactorizationReport>,
    passed: bool,
}

fn dsep(a: &DsepArgs, seed: u64, out: &mut OutputDir) -> Result<i32> {
    let (dag, plain, family) = match (&a.template, &a.dag) {
        (Some(f), None) => (build_gm_template(*f, a.n, a.tangent)?, build_gm_template(*f, a.n, false)?, Some(*f)),
        (None, Some(path)) => {
            let dag = parse_dag(&read(path)?)?;
            (dag.clone(), dag, None)
        }
        _ => return Err(Error::Usage("give exactly one of --template or --dag".into())),
    };
    let varrho = match &a.varrho {
        Some(s) => s.parse::<Varrho>()?,
        None => family.map_or(Varrho::Identity, |f| f.natural_varrho()),
    };
    let mut rows = Vec::new();
    let mut result = DsepOutput {
        nodes: dag.len(),
        varrho: varrho.clone(),
        queries: Vec::new(),
        sp2: None,
        dts: None,
        factorization: None,
        passed: true,
    };
    if a.query.is_empty() {
        let sp2 = verify_sp2(&dag, &varrho)?;
        rows.extend(sp2.checks.iter().map(|c| ("sp2", c.query.to_string(), c.separated)));
        result.passed &= sp2.passed;
        result.sp2 = Some(sp2);
        if a.tangent {
            let dts = verify_dts(&dag)?;
            rows.extend(dts.checks.iter().map(|c| ("dts", c.query.to_string(), c.separated)));
            result.passed &= dts.passed;
            result.dts = Some(dts);
        }
    } else {
        for text in &a.query {
            let query = parse_query(text)?;
            let separated = dag.d_separated(&query)?;
            rows.push(("query", query.to_string(), separated));
            result.queries.push(QueryResult { query, text: text.clone(), separated });
        }
    }
    if a.factorization {
        let f = factorization_check(&plain, &varrho, &mut stream(seed, 0))?;
        result.passed &= f.passed;
        result.factorization = Some(f);
    }

    let mut t = Table::new(format!("d-separation ({} nodes)", dag.len()), &["kind", "claim", "separated"]);
    for (kind, q, s) in &rows {
        t.row(vec![kind.to_string(), q.clone(), s.to_string()]);
    }
    t.print();
    if let Some(f) = &result.factorization {
        say!("factorization: max error {} over {} assignments", fmt(f.max_abs_error), f.assignments);
    }
    say!("verdict: {}", if result.passed { "pass" } else { "fail" });

    out.write("dag.txt", write_dag(&dag).as_bytes())?;
    out.write_json("dsep.json", &result)?;
    let cells = rows.iter().map(|(k, q, s)| vec![k.to_string(), q.clone(), s.to_string()]);
    out.write("dsep.csv", &csvf::table(&["kind", "claim", "separated"], cells)?)?;
    Ok(code(result.passed))
}

fn gen(a: &GenArgs, seed: u64, exec: &Parallel, out: &mut OutputDir) -> Result<i32> {
    if a.count == 0 {
        return Err(Error::Usage("--count must be positive".into()));
    }
    match a.what {
        GenWhat::Paths => {
            let cfg = a.process.build(a.n)?;
            let paths = exec.map(a.count, |k| {
                if a.tangent {
                    sample_with_tangent_at(&cfg, seed, k as u64)
                } else {
                    sample_path_at(&cfg, seed, k as u64)
                }
            });
            let paths = paths.into_iter().collect::<depsketch_core::Result<Vec<_>>>()?;
            out.write("process.toml", to_toml(&cfg)?.as_bytes())?;
            out.write_json("gen.json", &paths)?;
            out.write("gen.csv", &csvf::paths(&paths)?)?;
            let xs: Vec<f64> = paths.iter().flat_map(|p| p.xi.iter().copied()).collect();
            let s = depsketch_core::stats::Summary::of(&xs);
            let mut t = Table::new(format!("{} paths of length {}", paths.len(), cfg.n), &["quantity", "value"]);
            t.row(vec!["mean xi".into(), fmt(s.mean)]).row(vec!["min xi".into(), fmt(s.min)]).row(vec![
                "max xi".into(),
                fmt(s.max),
            ]);
            t.print();
        }
        GenWhat::Matrix => {
            let g = a.generator.build(a.rows, a.cols);
            g.validate()?;
            let ms = exec.map(a.count, |k| sample_dependent_matrix_at(&g, seed, k as u64));
            let ms = ms.into_iter().collect::<depsketch_core::Result<Vec<Matrix>>>()?;
            out.write("generator.toml", to_toml(&g)?.as_bytes())?;
            out.write("gen.txt", write_matrices(&ms, FloatStyle::Decimal).as_bytes())?;
            out.write("gen.csv", &csvf::matrices(&ms)?)?;
            let mut t = Table::new(format!("{} matrices {}x{}", ms.len(), a.rows, a.cols), &["matrix", "frobenius^2 / entries"]);
            for (k, m) in ms.iter().enumerate().take(10) {
                t.row(vec![k.to_string(), fmt(m.frobenius().powi(2) / (a.rows * a.cols) as f64)]);
            }
            t.print();
        }
    }
    Ok(0)
}

fn build_set(o: &SetOpts) -> Result<MatrixSetDescriptor> {
    let set = match &o.set_file {
        Some(path) if path.extension().is_some_and(|e| e == "toml") => load_toml(path)?,
        Some(path) => MatrixSetDescriptor::finite(parse_matrices(&read(path)?)?),
        None => match o.set {
            SetKind::VthetaSphere => MatrixSetDescriptor::VThetaSphere { n: o.n, p: o.p },
            SetKind::VthetaSparse => MatrixSetDescriptor::VThetaSparse { n: o.n, p: o.p, s: o.s },
            SetKind::ToeplitzBand => MatrixSetDescriptor::toeplitz_band(o.n, o.p, o.s),
        },
    };
    set.validate()?;
    Ok(set)
}

fn set_label(set: &MatrixSetDescriptor) -> String {
    let (r, c) = set.dims();
    let kind = match set {
        MatrixSetDescriptor::Finite { matrices } => format!("finite({})", matrices.len()),
        MatrixSetDescriptor::VThetaSphere { .. } => "vtheta-sphere".into(),
        MatrixSetDescriptor::VThetaSparse { s, .. } => format!("vtheta-sparse(s={s})"),
        MatrixSetDescriptor::VThetaPoints { thetas, .. } => format!("vtheta-points({})", thetas.len()),
        MatrixSetDescriptor::ToeplitzBand { s, .. } => format!("toeplitz-band(s={s})"),
        MatrixSetDescriptor::Explicit { extreme_points } => format!("hull({})", extreme_points.len()),
    };
    format!("{kind} {r}x{c}")
}

fn complexity_rows(r: &ComplexityReport) -> Vec<(&'static str, f64)> {
    vec![
        ("d_f", r.d_f),
        ("d_op", r.d_op),
        ("width", r.width),
        ("width_se", r.width_se),
        ("op_scale", r.op_scale),
        ("gamma2_upper", r.gamma2_upper),
    ]
}

#[derive(Serialize)]
struct WidthOutput<'a> {
    set: String,
    report: &'a ComplexityReport,
}

fn width(a: &WidthArgs, seed: u64, exec: &Parallel, out: &mut OutputDir) -> Result<i32> {
    let set = build_set(&a.set)?;
    let report = complexity_report(&set, a.trials, seed, a.gamma2_c, exec)?;
    let rows = complexity_rows(&report);
    let mut t = Table::new(format!("complexity of {}", set_label(&set)), &["quantity", "value"]);
    for (k, v) in &rows {
        t.row(vec![k.to_string(), fmt(*v)]);
    }
    t.print();
    out.write_json("width.json", &WidthOutput { set: set_label(&set), report: &report })?;
    out.write("width.csv", &csvf::table(&["quantity", "value"], rows.iter().map(|(k, v)| vec![k.to_string(), num(*v)]))?)?;
    Ok(0)
}

/// `start:stop:count`, both ends included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Usage(format!("ε grid `{spec}` is not start:stop:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts[..] else { return Err(bad()) };
    let (start, stop): (f64, f64) = (start.parse().map_err(|_| bad())?, stop.parse().map_err(|_| bad())?);
    let count: usize = count.parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect())
}

#[derive(Serialize)]
struct BoundRow {
    eps: f64,
    dependent: TailEvaluation,
    iid_reference: TailEvaluation,
}

#[derive(Serialize)]
struct BoundOutput {
    set: String,
    complexity: ComplexityReport,
    dependent: DeviationBound,
    iid_reference: DeviationBound,
    table: Vec<BoundRow>,
    monotone: bool,
}

fn bound(a: &BoundArgs, seed: u64, exec: &Parallel, out: &mut OutputDir) -> Result<i32> {
    let grid = parse_grid(&a.eps_grid)?;
    let set = build_set(&a.set)?;
    let cx = complexity_report(&set, a.trials, seed, a.gamma2_c, exec)?;
    let dep = deviation_bound(cx.d_f, cx.d_op, cx.gamma2_upper, a.c1, a.c2, BoundVariant::Dependent)?;
    let iid = deviation_bound(cx.d_f, cx.d_op, cx.gamma2_upper, a.c1, a.c2, BoundVariant::IidReference)?;
    let table: Vec<BoundRow> = grid
        .iter()
        .map(|&eps| BoundRow { eps, dependent: dep.tail_probability(eps), iid_reference: iid.tail_probability(eps) })
        .collect();
    let monotone = table.windows(2).all(|w| {
        w[1].eps < w[0].eps
            || (w[1].dependent.raw <= w[0].dependent.raw && w[1].iid_reference.raw <= w[0].iid_reference.raw)
    });

    say!(
        "{}: M = {}, V = {}, U = {} (i.i.d. reference M' = {})",
        set_label(&set),
        fmt(dep.m),
        fmt(dep.v),
        fmt(dep.u),
        fmt(iid.m)
    );
    let mut t = Table::new("tail bound", &["eps", "threshold", "probability", "branch", "iid probability"]);
    let mut rows = Vec::new();
    for r in &table {
        t.row(vec![
            fmt(r.eps),
            fmt(r.dependent.threshold),
            fmt(r.dependent.probability),
            format!("{:?}", r.dependent.branch).to_lowercase(),
            fmt(r.iid_reference.probability),
        ]);
        for (variant, e) in [("dependent", &r.dependent), ("iid_reference", &r.iid_reference)] {
            rows.push(vec![
                num(r.eps),
                variant.to_string(),
                num(e.threshold),
                num(e.raw),
                num(e.probability),
                format!("{:?}", e.branch).to_lowercase(),
            ]);
        }
    }
    t.print();
    say!("monotone in eps: {monotone}");
    out.write_json(
        "bound.json",
        &BoundOutput { set: set_label(&set), complexity: cx, dependent: dep, iid_reference: iid, table, monotone },
    )?;
    out.write("bound.csv", &csvf::table(&["eps", "variant", "threshold", "raw", "probability", "branch"], rows)?)?;
    Ok(code(monotone))
}

fn jl(a: &JlArgs, seed: u64, exec: &Parallel, out: &mut OutputDir) -> Result<i32> {
    let points = match &a.points_file {
        Some(path) => csvf::read_vectors(&read(path)?)?,
        None => random_points(a.points, a.dim, seed),
    };
    let p = points.first().map_or(0, Vec::len);
    let specs = a
        .n
        .iter()
        .map(|&n| {
            Ok(match a.sketch {
                SketchKind::Dense => SketchSpec::Dense { generator: a.generator.build(n, p), n },
                SketchKind::Countsketch => SketchSpec::CountSketch { n, d: a.d, pattern: a.pattern.into() },
                SketchKind::Toeplitz => SketchSpec::Toeplitz { n, process: a.process.build((2 * p).max(2) - 1)? },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sweep = jl_sweep(&points, &specs, a.eps, a.trials, seed, exec)?;

    let mut t = Table::new(
        format!("JL distortion, {} points in R^{p}, {} trials", points.len(), a.trials),
        &["n", "median", "q95", "failure rate"],
    );
    let mut rows = Vec::new();
    let mut passed = true;
    for run in &sweep.runs {
        t.row(vec![run.n.to_string(), fmt(run.summary.q50), fmt(run.summary.q95), fmt(run.failure_rate)]);
        rows.extend(
            run.distortions.iter().enumerate().map(|(k, d)| vec![format!("distortion_n{}", run.n), k.to_string(), num(*d)]),
        );
        if let Some(max) = a.max_failure_rate {
            passed &= run.failure_rate <= max;
        }
    }
    t.print();
    if let Some(s) = sweep.slope {
        say!("log-log slope of median distortion: {}", fmt(s));
    }
    out.write_json("jl.json", &sweep)?;
    out.write("jl.csv", &csvf::table(&["quantity", "trial", "value"], rows)?)?;
    Ok(code(passed))
}

#[derive(Serialize)]
struct RipOutput {
    estimate: RipEstimate,
    scaling: Option<RipScaling>,
}

fn rip(a: &RipArgs, seed: u64, exec: &Parallel, out: &mut OutputDir) -> Result<i32> {
    let g = a.generator.build(a.n, a.p);
    g.validate()?;
    let mode = match a.mc_trials {
        Some(trials) => RipMode::MonteCarlo { trials },
        None => RipMode::Exact,
    };
    let x = sample_dependent_matrix_at(&g, seed, 0)?;
    let estimate = rip_constant(&x, a.s, mode, derive_seed(seed, 1))?;
    say!("delta_{} = {} (n = {}, p = {}, {} supports)", a.s, estimate.delta_s, a.n, a.p, estimate.supports_examined);
    let mut rows = vec![
        vec!["delta_s".to_string(), num(estimate.delta_s)],
        vec!["supports_examined".to_string(), estimate.supports_examined.to_string()],
    ];
    let scaling = if a.scaling_ns.is_empty() {
        None
    } else {
        let sc = rip_scaling(&g, a.p, a.s, &a.scaling_ns, a.trials, seed, exec)?;
        let mut t = Table::new("median delta_s against n", &["n", "median", "normalized"]);
        for ((n, m), z) in sc.ns.iter().zip(&sc.median_delta).zip(&sc.normalized) {
            t.row(vec![n.to_string(), fmt(*m), fmt(*z)]);
            rows.push(vec![format!("median_delta_n{n}"), num(*m)]);
            rows.push(vec![format!("normalized_n{n}"), num(*z)]);
        }
        rows.push(vec!["band_ratio".into(), num(sc.band_ratio)]);
        t.print();
        say!("band ratio: {}", fmt(sc.band_ratio));
        Some(sc)
    };
    out.write_json("rip.json", &RipOutput { estimate, scaling })?;
    out.write("rip.csv", &csvf::table(&["quantity", "value"], rows)?)?;
    Ok(0)
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Usage(format!("sizes `{spec}` must be `a:b` or a comma list"));
    let sizes: Vec<usize> = match spec.split_once(':') {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            (a..=b).collect()
        }
        None => spec.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?,
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(bad());
    }
    Ok(sizes)
}

fn style(hex: bool) -> FloatStyle {
    if hex {
        FloatStyle::Hex
    } else {
        FloatStyle::Decimal
    }
}

fn toeplitz(a: &ToeplitzArgs, seed: u64, out: &mut OutputDir) -> Result<i32> {
    let ps = parse_sizes(&a.p)?;
    let report = toeplitz_fft_check(&ps, a.inputs, a.tol, seed)?;
    if let Some(rows) = a.dump_rows {
        let p = *ps.iter().max().expect("non-empty");
        let xi = random_points(1, 2 * p - 1, derive_seed(seed, 1)).remove(0);
        let op = build_toeplitz(xi, (0..rows).collect())?;
        out.write("toeplitz_operator.txt", write_operator(&op, style(a.hex)).as_bytes())?;
    }
    emit_report(out, "toeplitz", &report)?;
    Ok(code(report.passed()))
}

fn countsketch(a: &CountsketchArgs, seed: u64, exec: &Parallel, out: &mut OutputDir) -> Result<i32> {
    let report = countsketch_check(a.n, a.p, a.d, a.pattern.into(), a.sketches, seed, exec)?;
    if a.dump {
        let op = build_countsketch_with(a.n, a.p, a.d, a.pattern.into(), &mut stream(seed, 0))?;
        out.write("countsketch_operator.txt", write_operator(&op, style(a.hex)).as_bytes())?;
    }
    emit_report(out, "countsketch", &report)?;
    Ok(code(report.passed()))
}

fn bandit(a: &BanditArgs, seed: u64, exec: &Parallel, out: &mut OutputDir) -> Result<i32> {
    let mut cfg = BanditConfig::new(a.p, a.k, a.sigma, a.horizon);
    cfg.eps = a.eps;
    cfg.runs = a.runs;
    cfg.pilot_runs = a.pilot_runs;
    cfg.reference_t = a.reference_t.unwrap_or(a.horizon);
    cfg.c_sample = a.c_sample;
    cfg.noise_sd = a.noise_sd;
    cfg.ridge = a.ridge;
    let r = bandit_min_eig_experiment(&cfg, &a.adversary, seed, exec)?;

    let mut t = Table::new(format!("bandit p={} k={} sigma={}", a.p, a.k, a.sigma), &["quantity", "value"]);
    t.row(vec!["kappa_hat".into(), fmt(r.kappa_hat)])
        .row(vec!["t_min".into(), r.t_min.to_string()])
        .row(vec!["horizon".into(), r.horizon.to_string()])
        .row(vec!["pass fraction".into(), fmt(r.pass_fraction)])
        .row(vec!["early slope".into(), fmt(r.early_slope)]);
    t.print();
    print_report(&r.report);

    let rows = r.trajectories.iter().enumerate().flat_map(|(run, traj)| {
        r.checkpoints.iter().zip(traj).map(move |(t, l)| vec![run.to_string(), t.to_string(), num(*l)])
    });
    out.write("bandit.csv", &csvf::table(&["run", "t", "lambda_min"], rows)?)?;
    out.write("bandit_checks.csv", &csvf::checks(&[&r.report])?)?;
    out.write_json("bandit.json", &r)?;
    Ok(code(r.report.passed()))
}

fn single_matrix(path: &Path) -> Result<Matrix> {
    let mut ms = parse_matrices(&read(path)?)?;
    if ms.len() != 1 {
        return Err(Error::Usage(format!("{} must hold exactly one matrix", path.display())));
    }
    Ok(ms.remove(0))
}

fn weights_or_ones(w: &[f64], n: usize) -> Vec<f64> {
    if w.is_empty() {
        vec![1.0; n]
    } else {
        w.to_vec()
    }
}

fn verify(v: &VerifyCommand, seed: u64, exec: &Parallel, out: &mut OutputDir) -> Result<i32> {
    let report = match v {
        VerifyCommand::Decoupling(a) => {
            let cfg = a.process.build(a.n)?;
            let bset = match &a.bset {
                Some(path) => parse_matrices(&read(path)?)?,
                None => {
                    let b = random_bset(cfg.n, a.bset_count, seed);
                    out.write("bset.txt", write_matrices(&b, FloatStyle::Decimal).as_bytes())?;
                    b
                }
            };
            check_decoupling(&cfg, &bset, a.p_norm, a.trials, seed, exec)?
        }
        VerifyCommand::Symmetrization(a) => {
            let cfg = a.process.build(a.n)?;
            let w = weights_or_ones(&a.weights, cfg.n);
            check_symmetrization(&cfg, &w, &a.maps, a.p_norm, a.trials, seed, exec)?
        }
        VerifyCommand::Tangent(a) => {
            let cfg = a.process.build(a.n)?;
            let mask = match &a.mask {
                Some(path) => single_matrix(path)?,
                None => {
                    let m = bipartite_mask(cfg.n, seed);
                    out.write("mask.txt", write_matrices(std::slice::from_ref(&m), FloatStyle::Decimal).as_bytes())?;
                    m
                }
            };
            check_tangent_equivalence(&cfg, &mask, a.samples, seed, exec)?
        }
        VerifyCommand::Offdiag(a) => check_offdiag_zero(&a.process.build(a.n)?, a.trials, seed, exec)?,
        VerifyCommand::Cbd(a) => {
            let set = build_set(&a.set)?;
            let cfg = a.process.build(set.dims().1)?;
            estimate_cbd(&set, &cfg, a.trials, seed, exec)?
        }
        VerifyCommand::Contraction(a) => {
            let cfg = a.process.build(a.n)?;
            let w = weights_or_ones(&a.weights, cfg.n);
            check_contraction(&cfg, &w, a.p_norm, a.trials, seed, exec)?
        }
    };
    emit_report(out, &format!("verify-{}", v.name()), &report)?;
    Ok(code(report.passed()))
}

fn apply(a: &ApplyArgs, out: &mut OutputDir) -> Result<i32> {
    let op = parse_operator(&read(&a.operator)?)?;
    let inputs = csvf::read_vectors(&read(&a.input)?)?;
    let mut rows = Vec::new();
    for (k, u) in inputs.iter().enumerate() {
        let y = op.apply(u)?;
        rows.extend(y.iter().enumerate().map(|(i, v)| vec![k.to_string(), i.to_string(), num(*v)]));
    }
    let (r, c) = op.dims();
    say!("applied a {r}x{c} operator to {} vectors", inputs.len());
    out.write("apply.csv", &csvf::table(&["input", "index", "value"], rows)?)?;
    Ok(0)
}
