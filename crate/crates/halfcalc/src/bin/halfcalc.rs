//! Command-line front end: reads a JSON job config, runs one command, and
//! emits a deterministic JSON report.
//!
//! Exit codes: 0 ok, 2 usage/parse, 3 numeric/domain.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use halfcalc::calculus::{
    apply_path, calculus_laws, path_compare, path_tolerance, PathKind, PathOptions,
};
use halfcalc::config::JobConfig;
use halfcalc::error::HalfcalcError;
use halfcalc::observability::{
    boundedness_theorem_check, build_example, directional_energy, observability_report,
    ObservedSystem,
};
use halfcalc::report::{
    calculus_result_value, check_report, complex_value, fmt_f64, matrix_value, Report, Verdict,
};
use halfcalc::riesz::{carleson_products, gram_matrix, riesz_bounds, ExponentialSystem};
use halfcalc::semigroup::{scalar_trajectory, Generator, TimeGrid};
use halfcalc::toeplitz::{check_mg_properties, toeplitz_apply, SampledSignal};

#[derive(Parser)]
#[command(name = "halfcalc", version, about = "half-plane functional calculus workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct JobArgs {
    /// JSON job configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// re-parse and re-validate the emitted report
    #[arg(long)]
    check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// apply a symbol to a generator along the selected paths
    Apply(JobArgs),
    /// functional-calculus law residuals for a pair of symbols
    Laws(JobArgs),
    /// Gramian constants, directional search, boundedness check
    Observability(JobArgs),
    /// the diagonal benchmark example with trend tables
    Example {
        /// example size (overrides the config's example_size)
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        args: JobArgs,
    },
    /// Toeplitz eigen-relation and property residuals
    ToeplitzDemo(JobArgs),
}

enum CliError {
    Usage(String),
    Numeric(String),
}

impl From<HalfcalcError> for CliError {
    fn from(e: HalfcalcError) -> Self {
        match e {
            HalfcalcError::Validation(_) => CliError::Usage(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

fn load_config(args: &JobArgs) -> Result<JobConfig, CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required for this command".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = JobConfig::from_str(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    Ok(cfg)
}

fn config_echo(cfg: &JobConfig) -> Value {
    serde_json::to_value(cfg).unwrap_or(Value::Null)
}

fn grid_provenance(grid: &TimeGrid) -> Value {
    json!({
        "step": fmt_f64(grid.step()),
        "count": grid.count().to_string(),
        "horizon": fmt_f64(grid.horizon()),
    })
}

fn emit(report: &Report, args: &JobArgs) -> Result<(), CliError> {
    let text = report.render();
    if args.check {
        check_report(&text).map_err(|e| CliError::Numeric(format!("self-check failed: {e}")))?;
    }
    match &args.out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn push_path_result(report: &mut Report, r: &halfcalc::calculus::CalculusResult) {
    let key = format!("path:{}", r.path);
    report.add_result(&key, calculus_result_value(r));
    report.add_verdict(Verdict::new(
        &format!("{}:error-estimate-within-tolerance", r.path),
        r.error_estimate,
        r.tolerance,
        "self-reported a-posteriori error estimate against the path tolerance",
    ));
}

fn cmd_apply(cfg: &JobConfig) -> Result<Report, CliError> {
    let gen = cfg.build_generator()?;
    let g = cfg.build_symbol()?;
    let opts = cfg.path_options(&gen)?;
    let paths = cfg.path_kinds()?;
    let mut report = Report::new("apply", config_echo(cfg));

    if paths.is_empty() {
        if gen.spectral().is_some() {
            let cmp = path_compare(&g, &gen, &opts)?;
            push_path_result(&mut report, &cmp.oracle);
            for r in &cmp.results {
                push_path_result(&mut report, r);
            }
            for d in &cmp.deviations {
                report.add_verdict(Verdict::new(
                    &format!("{}:agrees-with-oracle", d.path),
                    d.deviation_from_oracle,
                    path_tolerance(&d.path),
                    "operator-norm deviation from the spectral oracle",
                ));
            }
            let pairwise: Vec<Value> = cmp
                .pairwise
                .iter()
                .map(|(a, b, dev)| json!([a.to_string(), b.to_string(), fmt_f64(*dev)]))
                .collect();
            report.add_result("pairwise_deviations", Value::Array(pairwise));
            let skipped: Vec<Value> = cmp
                .inapplicable
                .iter()
                .map(|(p, why)| json!([p.to_string(), why]))
                .collect();
            report.add_result("inapplicable", Value::Array(skipped));
        } else {
            // no oracle available: run the three computational paths and
            // report what applies
            let mut skipped = Vec::new();
            for path in [PathKind::Phillips, PathKind::Contour, PathKind::OutputMap] {
                match apply_path(&path, &g, &gen, &opts) {
                    Ok(r) => push_path_result(&mut report, &r),
                    Err(HalfcalcError::PathInapplicable(why))
                    | Err(HalfcalcError::Decay(why)) => {
                        skipped.push(json!([path.to_string(), why]));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            report.add_result("inapplicable", Value::Array(skipped));
        }
    } else {
        for path in &paths {
            let r = apply_path(path, &g, &gen, &opts)?;
            push_path_result(&mut report, &r);
        }
    }
    add_common_provenance(&mut report, cfg, &gen, &opts)?;
    Ok(report)
}

fn cmd_laws(cfg: &JobConfig) -> Result<Report, CliError> {
    let gen = cfg.build_generator()?;
    let symbols = cfg.symbol_list()?;
    if symbols.len() < 2 {
        return Err(CliError::Usage(
            "laws needs two symbols (fields `symbol` and `symbols`)".into(),
        ));
    }
    let opts = cfg.path_options(&gen)?;
    let paths = cfg.path_kinds()?;
    let path = paths
        .first()
        .cloned()
        .unwrap_or(PathKind::SpectralOracle);
    let laws = calculus_laws(&symbols[0], &symbols[1], &gen, &path, &opts)?;
    let mut report = Report::new("laws", config_echo(cfg));
    let threshold = path_tolerance(&path);
    for (name, residual) in [
        ("identity", laws.identity),
        ("additivity", laws.additivity),
        ("multiplicativity", laws.multiplicativity),
        ("semigroup-commutation", laws.semigroup_commutation),
        ("resolvent-commutation", laws.resolvent_commutation),
    ] {
        report.add_result(&format!("law:{name}"), json!(fmt_f64(residual)));
        report.add_verdict(Verdict::new(
            &format!("law:{name}"),
            residual,
            threshold,
            "relative residual of the calculus law on the chosen path",
        ));
    }
    report.add_result("path", json!(path.to_string()));
    add_common_provenance(&mut report, cfg, &gen, &opts)?;
    Ok(report)
}

fn cmd_observability(cfg: &JobConfig) -> Result<Report, CliError> {
    let gen = cfg.build_generator()?;
    let c = cfg.observation_matrix(gen.dim())?;
    let sys = ObservedSystem::new(gen, c)?;
    let starts = cfg.starts.unwrap_or(32);
    let seed = cfg.seed.unwrap_or(0);
    let obs = observability_report(&sys, starts, seed)?;
    let mut report = Report::new("observability", config_echo(cfg));
    report.add_result("gramian", matrix_value(&obs.gramian));
    for (key, v) in [
        ("k", obs.k),
        ("m", obs.m),
        ("k_dir", obs.k_dir),
        ("m_dir", obs.m_dir),
    ] {
        report.add_result(key, json!(fmt_f64(v)));
    }
    report.add_result(
        "search_trace",
        Value::Array(
            obs.trace
                .iter()
                .map(|(s, v, it)| json!([s.to_string(), fmt_f64(*v), it.to_string()]))
                .collect(),
        ),
    );
    report.add_result("note", json!(obs.note));
    report.add_verdict(Verdict::stated(
        "exactly-observable",
        obs.exact,
        obs.k,
        "K above the numerical zero 1e-8",
    ));
    report.add_verdict(Verdict::stated(
        "exactly-observable-by-direction",
        obs.exact_by_direction,
        obs.k_dir,
        "K_dir above the dimension-scaled numerical zero",
    ));

    let symbols = cfg.symbol_list()?;
    if !symbols.is_empty() {
        let opts = cfg.path_options(sys.generator())?;
        let path = cfg
            .path_kinds()?
            .first()
            .cloned()
            .unwrap_or(PathKind::SpectralOracle);
        let bd = boundedness_theorem_check(&sys, &symbols, &path, &opts, starts, seed)?;
        report.add_result("boundedness_ratio", json!(fmt_f64(bd.ratio)));
        report.add_result(
            "boundedness_margins",
            Value::Array(
                bd.margins
                    .iter()
                    .map(|(d, n, b, m)| json!([d, fmt_f64(*n), fmt_f64(*b), fmt_f64(*m)]))
                    .collect(),
            ),
        );
        report.add_verdict(Verdict::stated(
            "boundedness-theorem",
            bd.pass,
            bd.margins
                .iter()
                .map(|(_, _, _, m)| -*m)
                .fold(f64::NEG_INFINITY, f64::max),
            &bd.note,
        ));
    }
    report.add_provenance("seed", json!(seed.to_string()));
    report.add_provenance("starts", json!(starts.to_string()));
    Ok(report)
}

fn cmd_example(cfg: &JobConfig, n: Option<usize>) -> Result<Report, CliError> {
    let n = n.or(cfg.example_size).unwrap_or(8);
    let starts = cfg.starts.unwrap_or(8);
    let seed = cfg.seed.unwrap_or(0);
    let mut report = Report::new("example", json!({"n": n}));

    // trend table over doubling sections up to n
    let mut sizes = Vec::new();
    let mut size = 2;
    while size < n {
        sizes.push(size);
        size *= 2;
    }
    if n >= 1 {
        sizes.push(n);
    }
    sizes.dedup();
    let mut table = Vec::new();
    let mut worst_gram_dev: f64 = 0.0;
    for &s in &sizes {
        let (sys, x) = build_example(s, None)?;
        let obs = observability_report(&sys, starts, seed)?;
        let half = halfcalc::linalg::CMatrix::identity(s).scale(Complex64::new(0.5, 0.0));
        worst_gram_dev = worst_gram_dev.max(obs.gramian.sub(&half)?.norm_max());
        let w_top = directional_energy(&sys, &x)?;
        table.push(json!([
            s.to_string(),
            fmt_f64(obs.k),
            fmt_f64(obs.m),
            fmt_f64(obs.k_dir),
            fmt_f64(w_top),
        ]));
    }
    report.add_result("trend_table_columns", json!(["N", "K", "m", "K_dir", "lambda_max(W_xN)"]));
    report.add_result("trend_table", Value::Array(table));
    report.add_verdict(Verdict::new(
        "gramian-is-half-identity",
        worst_gram_dev,
        1e-9,
        "max-norm deviation of the Gramian from I/2 over the sweep",
    ));

    if n >= 2 {
        let exps = ExponentialSystem::new(
            (1..=n).map(|k| -(2.0_f64.powi(k as i32))).collect(),
        )?;
        let carleson = carleson_products(&exps)?;
        report.add_result("carleson_infimum", json!(fmt_f64(carleson.infimum)));
        report.add_result(
            "carleson_effective_infimum",
            json!(fmt_f64(carleson.effective_infimum)),
        );
        report.add_result("carleson_tail_note", json!(carleson.tail_note));
        report.add_verdict(Verdict::stated(
            "carleson-condition",
            carleson.pass,
            carleson.effective_infimum,
            "tail-adjusted infimum against the 0.01 margin",
        ));
        let riesz = riesz_bounds(&exps)?;
        report.add_result(
            "riesz_bounds",
            Value::Array(
                riesz
                    .bounds
                    .iter()
                    .map(|(s, lo, hi)| json!([s.to_string(), fmt_f64(*lo), fmt_f64(*hi)]))
                    .collect(),
            ),
        );
        report.add_verdict(Verdict::stated(
            "riesz-stable",
            riesz.stable,
            riesz.bounds.last().map(|b| b.1).unwrap_or(0.0),
            "lambda_min positive with no unresolved decay trend over the sweep",
        ));
        report.add_result("gram_matrix", matrix_value(&gram_matrix(&exps)));
    }
    report.add_provenance("seed", json!(seed.to_string()));
    report.add_provenance("starts", json!(starts.to_string()));
    Ok(report)
}

fn cmd_toeplitz_demo(cfg: &JobConfig) -> Result<Report, CliError> {
    let gen = cfg.build_generator()?;
    let g = cfg.build_symbol()?;
    let grid = cfg.build_grid(&gen)?;
    let mut report = Report::new("toeplitz-demo", config_echo(cfg));

    // eigen-relation per eigenvalue when the spectrum is explicit
    let eigenvalues: Vec<Complex64> = match gen.spectral() {
        Some(form) => form.eigenvalues.clone(),
        None => Vec::new(),
    };
    let mut rows = Vec::new();
    for (idx, a) in eigenvalues.iter().enumerate() {
        let f = SampledSignal::from_fn(grid.clone(), |t| (a * t).exp())?;
        let out = toeplitz_apply(&g, &f)?;
        let ga = g.eval(*a);
        let mut err = 0.0;
        let mut scale = 0.0;
        for (k, v) in out.values().iter().enumerate() {
            let want = ga * (a * grid.node(k)).exp();
            err += (v - want).norm_sqr();
            scale += want.norm_sqr();
        }
        let rel = (err / scale.max(1e-300)).sqrt();
        rows.push(json!([complex_value(*a), fmt_f64(rel)]));
        report.add_verdict(Verdict::new(
            &format!("eigen-relation:{idx}"),
            rel,
            1e-3,
            "relative L2 error of M_g e^{at} against g(a) e^{at}",
        ));
    }
    report.add_result("eigen_relation", Value::Array(rows));

    // property residuals on the slowest-mode trajectory
    let dim = gen.dim();
    let y = vec![Complex64::new(1.0, 0.0); dim];
    let x: Vec<Complex64> = (0..dim)
        .map(|i| Complex64::new(1.0 / (i as f64 + 1.0), 0.0))
        .collect();
    let f = scalar_trajectory(&gen, &y, &x, &grid)?;
    let tau = 16.0 * grid.step();
    let props = check_mg_properties(&g, &g, &f, tau)?;
    report.add_result(
        "properties",
        json!({
            "contraction_margin": fmt_f64(props.contraction_margin),
            "shift_commutation": fmt_f64(props.shift_commutation),
            "multiplicativity": fmt_f64(props.multiplicativity),
        }),
    );
    report.add_verdict(Verdict::new(
        "contraction",
        props.contraction_margin,
        1e-9,
        "||M_g f|| - ||g||_inf ||f|| must not be positive beyond slack",
    ));
    report.add_verdict(Verdict::new(
        "shift-commutation",
        props.shift_commutation,
        1e-3,
        "relative commutation residual away from the horizon",
    ));
    report.add_verdict(Verdict::new(
        "multiplicativity",
        props.multiplicativity,
        1e-3,
        "relative residual of M_{gg} against M_g M_g",
    ));
    report.add_provenance("grid", grid_provenance(&grid));
    Ok(report)
}

fn add_common_provenance(
    report: &mut Report,
    cfg: &JobConfig,
    gen: &Generator,
    opts: &PathOptions,
) -> Result<(), CliError> {
    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => TimeGrid::default_for(gen)?,
    };
    report.add_provenance("grid", grid_provenance(&grid));
    report.add_provenance(
        "quadrature",
        json!({
            "phillips_panels": opts.phillips_panels.to_string(),
            "contour_y": fmt_f64(opts.contour_y),
            "contour_eps": opts.contour_eps.map(fmt_f64).unwrap_or_else(|| "auto".into()),
        }),
    );
    report.add_provenance(
        "seed",
        json!(cfg.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into())),
    );
    Ok(())
}

fn run() -> Result<(), CliError> {
    halfcalc::parallel::init_thread_cap();
    let cli = Cli::parse();
    let (args, report) = match &cli.command {
        Command::Apply(args) => (args, cmd_apply(&load_config(args)?)?),
        Command::Laws(args) => (args, cmd_laws(&load_config(args)?)?),
        Command::Observability(args) => (args, cmd_observability(&load_config(args)?)?),
        Command::Example { n, args } => {
            let cfg = match &args.config {
                Some(_) => load_config(args)?,
                None => {
                    let mut cfg = JobConfig::from_str("{}")?;
                    cfg.seed = args.seed;
                    cfg
                }
            };
            (args, cmd_example(&cfg, *n)?)
        }
        Command::ToeplitzDemo(args) => (args, cmd_toeplitz_demo(&load_config(args)?)?),
    };
    emit(&report, args)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
