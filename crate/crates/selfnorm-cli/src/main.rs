//! `selfnorm`: command-line driver for Edgeworth expansion studies of
//! self-normalized sums.
//!
//! Subcommands: `expand` (tabulate an expansion), `simulate` (Monte Carlo
//! summary as CSV), `rates` (error-vs-n curves with a log-log fit),
//! `entropy-coeffs` (entropy expansion coefficients as JSON), `lambda`
//! (Monte Carlo vs closed-form lambda-term means), `check` (invariant
//! smoke suite).
//!
//! Exit codes: 0 success, 1 runtime/invariant failure, 2 usage error.

mod check;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use selfnorm::distributions::SymmetricLaw;
use selfnorm::entropy_coeffs::c_l;
use selfnorm::expansion::{edgeworth_cdf, edgeworth_pdf};
use selfnorm::lambda_moments::{expected_lambda_terms_for, mc_lambda_mean, LambdaTerm};
use selfnorm::metrics::{l1_distance, rate_fit, relative_entropy, weighted_sup_error};
use selfnorm::simulate::{gaussian_exact_density, run_simulation, SimConfig};

use config::{parse_n_list, FileConfig};
use output::{num, out_dir, Report};

const USAGE_EXIT: u8 = 2;
const RUNTIME_EXIT: u8 = 1;

/// An error that already knows its exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError { code: USAGE_EXIT, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> CliError {
        CliError { code: RUNTIME_EXIT, message: message.into() }
    }
}

impl From<selfnorm::Error> for CliError {
    fn from(e: selfnorm::Error) -> CliError {
        use selfnorm::Error::*;
        let code = match e {
            UnknownLaw { .. }
            | UnsupportedOrder { .. }
            | MissingMoment { .. }
            | LawUnsupported { .. }
            | InvalidInput(_) => USAGE_EXIT,
            QuadratureNonConvergent { .. } | InvariantViolation(_) => RUNTIME_EXIT,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(
    name = "selfnorm",
    version,
    about = "Edgeworth expansions for self-normalized sums",
    max_term_width = 100
)]
struct Cli {
    /// Flat KEY=VALUE config file; flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory for output files (default: $SELFNORM_OUT_DIR, else `.`).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads for Monte Carlo commands (default: all cores).
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate an Edgeworth CDF/density expansion over a grid (CSV).
    Expand(ExpandArgs),
    /// Run a Monte Carlo experiment and print its ECDF/histogram summary (CSV).
    Simulate(SimulateArgs),
    /// Approximation error against a reference across sample sizes, with a
    /// log-log rate fit (CSV, optional SVG plot).
    Rates(RatesArgs),
    /// Entropy expansion coefficients c_l by quadrature (JSON).
    EntropyCoeffs(EntropyCoeffsArgs),
    /// Monte Carlo means of the conditional lambda terms vs their closed-form
    /// expansions (CSV).
    Lambda(LambdaArgs),
    /// Run the invariant smoke suite; one PASS/FAIL line per family.
    Check,
}

#[derive(Args)]
struct ExpandArgs {
    /// Law id: gaussian, uniform, laplace, gauss_mix.
    #[arg(long)]
    law: Option<String>,
    /// Expansion order m (2, 4, or 6).
    #[arg(long)]
    m: Option<usize>,
    /// Sample size n.
    #[arg(long)]
    n: Option<u64>,
    /// Grid minimum.
    #[arg(long, allow_negative_numbers = true)]
    grid_min: Option<f64>,
    /// Grid maximum.
    #[arg(long, allow_negative_numbers = true)]
    grid_max: Option<f64>,
    /// Grid step.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Also write the output to this file (inside the output directory).
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Law id: gaussian, uniform, laplace, gauss_mix.
    #[arg(long)]
    law: Option<String>,
    /// Sample size n.
    #[arg(long)]
    n: Option<u64>,
    /// Number of replications.
    #[arg(long)]
    reps: Option<u64>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Stream index (shards meant to be merged use distinct streams).
    #[arg(long)]
    stream: Option<u64>,
    /// Also write the output to this file (inside the output directory).
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

#[derive(Args)]
struct RatesArgs {
    /// Law id: gaussian, uniform, laplace, gauss_mix.
    #[arg(long)]
    law: Option<String>,
    /// Expansion order m (2, 4, or 6).
    #[arg(long)]
    m: Option<usize>,
    /// Error metric: density-sup, cdf-sup, tv, entropy.
    #[arg(long)]
    metric: Option<String>,
    /// Reference: oracle (exact gaussian density), ecdf, hist.
    #[arg(long)]
    reference: Option<String>,
    /// Comma-separated sample sizes, e.g. 16,32,64,128.
    #[arg(long)]
    n_list: Option<String>,
    /// Replications per sample size (Monte Carlo references only).
    #[arg(long)]
    reps: Option<u64>,
    /// RNG seed (Monte Carlo references only).
    #[arg(long)]
    seed: Option<u64>,
    /// Write a log-log SVG plot to this file (inside the output directory).
    #[arg(long, value_name = "FILE")]
    svg: Option<String>,
    /// Also write the CSV to this file (inside the output directory).
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

#[derive(Args)]
struct EntropyCoeffsArgs {
    /// Law id: gaussian, uniform, laplace, gauss_mix.
    #[arg(long)]
    law: Option<String>,
    /// Highest coefficient index to compute (1..=3).
    #[arg(long)]
    lmax: Option<u32>,
    /// Also write the JSON to this file (inside the output directory).
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

#[derive(Args)]
struct LambdaArgs {
    /// Law id with a sampler: gaussian, uniform, laplace, gauss_mix.
    #[arg(long)]
    law: Option<String>,
    /// Comma-separated sample sizes, e.g. 8,16,32.
    #[arg(long)]
    n_list: Option<String>,
    /// Term id: lambda4_over_24, lambda6_over_720, half_lambda4_over_24_sq,
    /// or all.
    #[arg(long)]
    term: Option<String>,
    /// Monte Carlo replications per (n, term).
    #[arg(long)]
    reps: Option<u64>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the CSV to this file (inside the output directory).
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(CliError::usage)?,
        None => FileConfig::default(),
    };
    if let Some(threads) = file_cfg.resolve_opt(cli.threads, "threads").map_err(CliError::usage)? {
        if threads == 0 {
            return Err(CliError::usage("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;
    }
    let dir = out_dir(cli.out_dir);

    match cli.cmd {
        Command::Expand(a) => cmd_expand(a, &file_cfg, &dir),
        Command::Simulate(a) => cmd_simulate(a, &file_cfg, &dir),
        Command::Rates(a) => cmd_rates(a, &file_cfg, &dir),
        Command::EntropyCoeffs(a) => cmd_entropy_coeffs(a, &file_cfg, &dir),
        Command::Lambda(a) => cmd_lambda(a, &file_cfg, &dir),
        Command::Check => Ok(if check::run_all() { 0 } else { RUNTIME_EXIT }),
    }
}

fn resolve_law(cfg: &FileConfig, flag: Option<String>) -> Result<SymmetricLaw, CliError> {
    let id = cfg.resolve(flag, "law", "gaussian".to_owned()).map_err(CliError::usage)?;
    Ok(SymmetricLaw::from_id(&id)?)
}

fn finish(report: Report, dir: &std::path::Path, file: Option<&str>) -> Result<u8, CliError> {
    report.finish(dir, file).map_err(CliError::runtime)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// expand
// ---------------------------------------------------------------------------

fn cmd_expand(a: ExpandArgs, cfg: &FileConfig, dir: &std::path::Path) -> Result<u8, CliError> {
    let law = resolve_law(cfg, a.law)?;
    let m = cfg.resolve(a.m, "m", 4).map_err(CliError::usage)?;
    let n = cfg.resolve(a.n, "n", 100).map_err(CliError::usage)?;
    let grid_min = cfg.resolve(a.grid_min, "grid-min", -6.0).map_err(CliError::usage)?;
    let grid_max = cfg.resolve(a.grid_max, "grid-max", 6.0).map_err(CliError::usage)?;
    let grid_step = cfg.resolve(a.grid_step, "grid-step", 0.05).map_err(CliError::usage)?;
    let out = cfg.resolve_opt(a.out, "out").map_err(CliError::usage)?;
    if !grid_step.is_finite() || grid_step <= 0.0 || grid_max < grid_min {
        return Err(CliError::usage("grid needs grid-min <= grid-max and grid-step > 0"));
    }

    let cdf = edgeworth_cdf(m, n, &law)?;
    let pdf = edgeworth_pdf(m, n, &law)?;

    let mut report = Report::new();
    report.comment(&format!("expand law={} m={} n={}", law.id(), m, n));
    if m >= 4 {
        report.comment(&format!("mu4={}", num(cdf.mu4())));
    }
    if m >= 6 {
        report.comment(&format!("mu6={}", num(cdf.mu6())));
    }
    report.push("x,cdf,density".to_owned());
    let steps = ((grid_max - grid_min) / grid_step).round() as u64;
    for i in 0..=steps {
        let x = grid_min + i as f64 * grid_step;
        if x > grid_max + grid_step * 0.5 {
            break;
        }
        report.push(format!("{},{},{}", num(x), num(cdf.eval(x)), num(pdf.eval(x))));
    }
    finish(report, dir, out.as_deref())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(a: SimulateArgs, cfg: &FileConfig, dir: &std::path::Path) -> Result<u8, CliError> {
    let law = resolve_law(cfg, a.law)?;
    let n = cfg.resolve(a.n, "n", 64).map_err(CliError::usage)?;
    let reps = cfg.resolve(a.reps, "reps", 100_000).map_err(CliError::usage)?;
    let seed = cfg.resolve(a.seed, "seed", 2024).map_err(CliError::usage)?;
    let stream = cfg.resolve(a.stream, "stream", 0).map_err(CliError::usage)?;
    let out = cfg.resolve_opt(a.out, "out").map_err(CliError::usage)?;

    let sim_cfg = SimConfig::new(law, n, reps, seed).with_stream(stream);
    let summary = run_simulation(&sim_cfg)?;

    let mut report = Report::new();
    report.comment(&format!(
        "simulate law={} n={} reps={} seed={} stream={} version={}",
        summary.law, summary.n, summary.reps, seed, stream, summary.version
    ));
    report.push("kind,x,value".to_owned());
    let points = summary.ecdf.points();
    let values = summary.ecdf.ecdf_values();
    for (x, v) in points.iter().zip(&values) {
        report.push(format!("ecdf,{},{}", num(*x), num(*v)));
    }
    for (center, density) in summary.hist.density_points() {
        report.push(format!("density,{},{}", num(center), num(density)));
    }
    finish(report, dir, out.as_deref())
}

// ---------------------------------------------------------------------------
// rates
// ---------------------------------------------------------------------------

fn oracle_grid(n: u64) -> Vec<f64> {
    let half = (n as f64).sqrt().min(8.0);
    let steps = (2.0 * half / 0.01).round() as i64;
    (0..=steps).map(|i| -half + i as f64 * 0.01).collect()
}

fn cmd_rates(a: RatesArgs, cfg: &FileConfig, dir: &std::path::Path) -> Result<u8, CliError> {
    let law = resolve_law(cfg, a.law)?;
    let m = cfg.resolve(a.m, "m", 4).map_err(CliError::usage)?;
    let metric =
        cfg.resolve(a.metric, "metric", "density-sup".to_owned()).map_err(CliError::usage)?;
    let reference =
        cfg.resolve(a.reference, "reference", "oracle".to_owned()).map_err(CliError::usage)?;
    let n_list_raw =
        cfg.resolve(a.n_list, "n-list", "16,32,64,128".to_owned()).map_err(CliError::usage)?;
    let ns = parse_n_list(&n_list_raw).map_err(CliError::usage)?;
    let reps = cfg.resolve(a.reps, "reps", 100_000).map_err(CliError::usage)?;
    let seed = cfg.resolve(a.seed, "seed", 2024).map_err(CliError::usage)?;
    let svg_file = cfg.resolve_opt(a.svg, "svg").map_err(CliError::usage)?;
    let out = cfg.resolve_opt(a.out, "out").map_err(CliError::usage)?;

    let oracle_ref = reference == "oracle";
    if oracle_ref && law != SymmetricLaw::Gaussian {
        return Err(CliError::usage(
            "reference \"oracle\" (the exact T_n density) requires --law gaussian",
        ));
    }

    let mut report = Report::new();
    report.comment(&format!(
        "rates law={} m={} metric={metric} reference={reference}",
        law.id(),
        m
    ));
    if !oracle_ref {
        report.comment(&format!("reps={reps} seed={seed}"));
    }
    report.push("n,metric,m,law,value,stderr".to_owned());

    let mut pairs: Vec<(u64, f64)> = Vec::new();
    for &n in &ns {
        let (value, stderr) = match (metric.as_str(), reference.as_str()) {
            ("density-sup", "oracle") => {
                let pdf = edgeworth_pdf(m, n, &law)?;
                let grid = oracle_grid(n);
                let v = weighted_sup_error(
                    |x| pdf.eval(x),
                    |x| gaussian_exact_density(n, x).expect("n >= 2"),
                    m as u32,
                    &grid,
                )?;
                (v, 0.0)
            }
            ("tv", "oracle") => {
                let pdf = edgeworth_pdf(m, n, &law)?;
                let b = (n as f64).sqrt().max(12.0);
                let v = l1_distance(
                    |x| pdf.eval(x),
                    |x| gaussian_exact_density(n, x).expect("n >= 2"),
                    -b,
                    b,
                )?;
                (v, 0.0)
            }
            ("entropy", "oracle") => {
                let root = (n as f64).sqrt();
                let v = relative_entropy(
                    |x| gaussian_exact_density(n, x).expect("n >= 2"),
                    -root,
                    root,
                )?;
                (v, 0.0)
            }
            ("cdf-sup", "ecdf") => {
                let sim = run_simulation(&SimConfig::new(law.clone(), n, reps, seed))?;
                let cdf = edgeworth_cdf(m, n, &law)?;
                let points = sim.ecdf.points();
                let values = sim.ecdf.ecdf_values();
                let mut worst = 0.0f64;
                for (x, f_hat) in points.iter().zip(&values) {
                    let w = (1.0 + x.abs()).powi(m as i32);
                    worst = worst.max(w * (f_hat - cdf.eval(*x)).abs());
                }
                let noise = ((reps as f64).ln() / reps as f64).sqrt();
                (worst, noise)
            }
            ("density-sup", "hist") => {
                let sim = run_simulation(&SimConfig::new(law.clone(), n, reps, seed))?;
                let pdf = edgeworth_pdf(m, n, &law)?;
                let mut worst = 0.0f64;
                for (center, density) in sim.hist.density_points() {
                    let w = (1.0 + center.abs()).powi(m as i32);
                    worst = worst.max(w * (density - pdf.eval(center)).abs());
                }
                let noise = (0.4 / (reps as f64 * sim.hist.bin_width())).sqrt();
                (worst, noise)
            }
            _ => {
                return Err(CliError::usage(format!(
                    "unsupported metric/reference pair {metric:?}/{reference:?} \
                     (valid: density-sup/oracle, tv/oracle, entropy/oracle, \
                     cdf-sup/ecdf, density-sup/hist)"
                )));
            }
        };
        report.push(format!(
            "{n},{metric},{m},{law_id},{},{}",
            num(value),
            num(stderr),
            law_id = law.id()
        ));
        pairs.push((n, value));
    }

    if pairs.iter().all(|&(_, v)| v > 0.0) && pairs.len() >= 3 {
        let fit = rate_fit(&pairs)?;
        report.push(format!(
            "fit,{metric},{m},{law_id},{},{}",
            num(fit.slope),
            num(fit.r_squared),
            law_id = law.id()
        ));
        if let Some(name) = &svg_file {
            let title = format!("{} {metric} m={m}", law.id());
            let body = svg::rate_plot(&fit, &title);
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::runtime(format!("creating {}: {e}", dir.display())))?;
            let path = dir.join(name);
            std::fs::write(&path, body)
                .map_err(|e| CliError::runtime(format!("writing {}: {e}", path.display())))?;
            report.comment(&format!("svg written to {}", path.display()));
        }
    } else {
        report.comment("rate fit skipped: need >= 3 strictly positive errors");
    }
    finish(report, dir, out.as_deref())
}

// ---------------------------------------------------------------------------
// entropy-coeffs
// ---------------------------------------------------------------------------

fn cmd_entropy_coeffs(
    a: EntropyCoeffsArgs,
    cfg: &FileConfig,
    dir: &std::path::Path,
) -> Result<u8, CliError> {
    let law = resolve_law(cfg, a.law)?;
    let lmax = cfg.resolve(a.lmax, "lmax", 3).map_err(CliError::usage)?;
    let out = cfg.resolve_opt(a.out, "out").map_err(CliError::usage)?;

    let mu4 = law.moment(4)?;
    let mu6 = law.moment(6)?;
    let mut obj = serde_json::Map::new();
    let mut partial: Vec<u32> = Vec::new();
    for l in 1..=lmax {
        let coeff = c_l(mu4, mu6, l)?;
        obj.insert(format!("c{l}"), serde_json::json!(coeff.value));
        if coeff.partial {
            partial.push(l);
        }
    }
    obj.insert("partial".to_owned(), serde_json::json!(partial));
    let body = serde_json::to_string_pretty(&serde_json::Value::Object(obj))
        .map_err(|e| CliError::runtime(e.to_string()))?;

    let mut report = Report::new();
    report.push(body);
    finish(report, dir, out.as_deref())
}

// ---------------------------------------------------------------------------
// lambda
// ---------------------------------------------------------------------------

fn cmd_lambda(a: LambdaArgs, cfg: &FileConfig, dir: &std::path::Path) -> Result<u8, CliError> {
    let law = resolve_law(cfg, a.law)?;
    let n_list_raw =
        cfg.resolve(a.n_list, "n-list", "8,16,32,64".to_owned()).map_err(CliError::usage)?;
    let ns = parse_n_list(&n_list_raw).map_err(CliError::usage)?;
    let term_raw = cfg.resolve(a.term, "term", "all".to_owned()).map_err(CliError::usage)?;
    let reps = cfg.resolve(a.reps, "reps", 100_000).map_err(CliError::usage)?;
    let seed = cfg.resolve(a.seed, "seed", 2024).map_err(CliError::usage)?;
    let out = cfg.resolve_opt(a.out, "out").map_err(CliError::usage)?;

    let terms: Vec<LambdaTerm> = if term_raw == "all" {
        LambdaTerm::ALL.to_vec()
    } else {
        vec![LambdaTerm::from_id(&term_raw)?]
    };
    let expansions = expected_lambda_terms_for(&law)?;

    let mut report = Report::new();
    report.comment(&format!("lambda law={} reps={reps} seed={seed}", law.id()));
    report.comment("closed_form is the two-term asymptotic expansion of E[term]");
    report.push("n,term,estimate,se,closed_form".to_owned());
    for &n in &ns {
        for term in &terms {
            let (estimate, se) = mc_lambda_mean(&law, n, *term, reps, seed)?;
            let closed = expansions
                .iter()
                .find(|e| e.term == *term)
                .expect("every term has an expansion")
                .predict(n);
            report.push(format!("{n},{},{},{},{}", term.id(), num(estimate), num(se), num(closed)));
        }
    }
    finish(report, dir, out.as_deref())
}
