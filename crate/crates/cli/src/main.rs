//! `lt-analyzer`: command-line front end for the LT code analysis library.
//!
//! Exit status: 0 on success, 2 on invalid input, 1 on numeric failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lt_analysis::asymptotic::{beta_series, collapse_fraction, write_curve_csv};
use lt_analysis::bounds::{default_window, failure_sandwich, sandwich, tail_bounds};
use lt_analysis::degree_dist::DegreeDistribution;
use lt_analysis::finite_length::{failure_probability, EngineChoice, FiniteOptions, DEFAULT_PRECISION_BITS};
use lt_analysis::montecarlo::{decoded_fraction_profile, estimate_failure, SimulationMode, SimulationOptions};
use lt_analysis::sampler::CodeParameters;
use lt_analysis::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "lt-analyzer", version, about = "Failure analysis for LT fountain codes under the Poisson model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a degree distribution as JSON.
    GenDist(GenDistArgs),
    /// Limiting recoverable fraction z*.
    Asymptotic(AsymptoticArgs),
    /// Exact failure probability.
    Finite(FiniteArgs),
    /// Fixed-count bounds from Poisson-model failure probabilities.
    Bounds(BoundsArgs),
    /// Monte Carlo estimate of the failure probability.
    Simulate(SimulateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GenKind {
    Ideal,
    Robust,
    File,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Builtin {
    Ideal,
    Robust,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EngineArg {
    Auto,
    Naive,
    Poly,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Poisson,
    #[value(name = "fixed_n", alias = "fixed-n")]
    FixedN,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed; only simulations consume randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the main result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Degree distribution: one of --dist, --dist-file or --weights.
#[derive(Args, Debug)]
#[group(id = "source", multiple = false)]
struct DistSource {
    /// Built-in soliton distribution (needs --k).
    #[arg(long, value_enum)]
    dist: Option<Builtin>,
    /// Distribution JSON file.
    #[arg(long)]
    dist_file: Option<PathBuf>,
    /// Inline weights, e.g. `1:0.1,2:0.9`.
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Args, Debug)]
struct DistArgs {
    #[command(flatten)]
    source: DistSource,
    /// Robust soliton constant c.
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    /// Robust soliton failure parameter.
    #[arg(long, default_value_t = 0.5)]
    delta_rs: f64,
}

#[derive(Args, Debug)]
#[group(id = "count", multiple = false, args = ["n", "delta"])]
struct CountArgs {
    /// Mean number of received symbols.
    #[arg(long)]
    n: Option<f64>,
    /// Overhead, n = (1 + delta)·k.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
}

#[derive(Args, Debug)]
struct GenDistArgs {
    #[arg(value_enum)]
    kind: GenKind,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    delta_rs: f64,
    /// Input JSON for `file`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct AsymptoticArgs {
    #[command(flatten)]
    source: DistArgs,
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    count: CountArgs,
    /// Bisection tolerance.
    #[arg(long, default_value_t = lt_analysis::asymptotic::DEFAULT_TOL)]
    tol: f64,
    /// Points in the sign scan.
    #[arg(long, default_value_t = lt_analysis::asymptotic::DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Ripple-fraction curve CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct EngineArgs {
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    engine: EngineArg,
    /// Mantissa bits for the polynomial engine (53, 128, 192 or 256).
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    precision_bits: u32,
}

#[derive(Args, Debug)]
struct FiniteArgs {
    #[command(flatten)]
    source: DistArgs,
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    count: CountArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Full Q table CSV (`u,r,Q`).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Distribution; not needed with --p-n1/--p-n2 or --deviation.
    #[command(flatten)]
    source: DistArgs,
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    count: CountArgs,
    #[arg(long)]
    n1: Option<f64>,
    #[arg(long)]
    n2: Option<f64>,
    /// Use these probabilities at n1 and n2 directly instead of computing them.
    #[arg(long, requires = "p_n2")]
    p_n1: Option<f64>,
    #[arg(long, requires = "p_n1")]
    p_n2: Option<f64>,
    /// Print the concentration tails for this deviation instead.
    #[arg(long)]
    deviation: Option<f64>,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: DistArgs,
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    count: CountArgs,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Poisson)]
    mode: ModeArg,
    /// Worker threads (default: logical cores).
    #[arg(long, env = "LT_ANALYZER_JOBS")]
    jobs: Option<usize>,
    /// Decoded-fraction histogram CSV (`bin_lo,bin_hi,count`).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Mean ripple trajectory CSV (`u,mean_X_u`).
    #[arg(long)]
    trajectory_csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn parse_weights(text: &str) -> Result<Vec<(usize, f64)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (d, p) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("weight `{item}` is not of the form d:p")))?;
            let d = d.trim().parse::<usize>().map_err(|e| Error::Parse(format!("degree `{d}`: {e}")))?;
            let p = p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("weight `{p}`: {e}")))?;
            Ok((d, p))
        })
        .collect()
}

fn load_dist(
    dist: Option<Builtin>,
    file: Option<&Path>,
    weights: Option<&str>,
    c: f64,
    delta_rs: f64,
    k: Option<usize>,
) -> Result<DegreeDistribution> {
    let d = match (dist, file, weights) {
        (Some(kind), _, _) => {
            let k = k.ok_or_else(|| Error::InvalidParameter("--k is required with --dist".into()))?;
            match kind {
                Builtin::Ideal => DegreeDistribution::soliton_ideal(k)?,
                Builtin::Robust => DegreeDistribution::soliton_robust(k, c, delta_rs)?,
            }
        }
        (None, Some(path), _) => DegreeDistribution::read(path)?,
        (None, None, Some(w)) => {
            let raw = parse_weights(w)?;
            let max_d = raw.iter().map(|&(d, _)| d).max().unwrap_or(0);
            DegreeDistribution::validate(&raw, k.unwrap_or(max_d).max(1))?
        }
        (None, None, None) => return Err(Error::InvalidParameter("no degree distribution given".into())),
    };
    match k {
        Some(k) if k != d.k() => d.with_k(k),
        _ => Ok(d),
    }
}

impl DistArgs {
    fn load(&self, k: Option<usize>) -> Result<DegreeDistribution> {
        let s = &self.source;
        load_dist(s.dist, s.dist_file.as_deref(), s.weights.as_deref(), self.c, self.delta_rs, k)
    }
}

impl CountArgs {
    fn params(&self, k: usize) -> Result<CodeParameters> {
        match (self.n, self.delta) {
            (Some(n), None) => CodeParameters::new(k, n),
            (None, Some(d)) => CodeParameters::with_overhead(k, d),
            _ => Err(Error::InvalidParameter("exactly one of --n and --delta is required".into())),
        }
    }
}

impl EngineArgs {
    fn options(&self, full_table: bool) -> FiniteOptions {
        FiniteOptions {
            engine: match self.engine {
                EngineArg::Auto => EngineChoice::Auto,
                EngineArg::Naive => EngineChoice::Naive,
                EngineArg::Poly => EngineChoice::Poly,
            },
            precision_bits: self.precision_bits,
            full_table,
            ..FiniteOptions::default()
        }
    }
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
            out.flush()?;
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn gen_dist(a: &GenDistArgs) -> Result<()> {
    let d = match a.kind {
        GenKind::Ideal => load_dist(Some(Builtin::Ideal), None, None, a.c, a.delta_rs, a.k)?,
        GenKind::Robust => load_dist(Some(Builtin::Robust), None, None, a.c, a.delta_rs, a.k)?,
        GenKind::File => {
            let path = a.input.as_deref().ok_or_else(|| Error::InvalidParameter("--in is required".into()))?;
            load_dist(None, Some(path), None, a.c, a.delta_rs, a.k)?
        }
    };
    emit(&a.common, &d.to_json())
}

fn asymptotic(a: &AsymptoticArgs) -> Result<()> {
    let d = a.source.load(a.k)?;
    let delta = match (a.count.n, a.count.delta) {
        (_, Some(delta)) => delta,
        (Some(n), None) => n / a.k.unwrap_or(d.k()) as f64 - 1.0,
        (None, None) => 0.0,
    };
    let series = beta_series(&d, delta)?;
    let result = collapse_fraction(&series, a.tol, a.grid_points)?;
    if let Some(path) = &a.csv {
        let grid: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let mut w = create(path)?;
        write_curve_csv(&series, &grid, &mut w)?;
        w.flush()?;
    }
    emit(&a.common, &to_json(&result))
}

fn finite(a: &FiniteArgs) -> Result<()> {
    let d = a.source.load(a.k)?;
    let params = a.count.params(a.k.unwrap_or(d.k()))?;
    let result = failure_probability(&d, &params, &a.engine.options(a.csv.is_some()))?;
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        result.write_table_csv(&mut w)?;
        w.flush()?;
    }
    emit(&a.common, &result.to_json())
}

fn bounds(a: &BoundsArgs) -> Result<()> {
    let n = match (a.count.n, a.count.delta, a.k) {
        (Some(n), None, _) => n,
        (None, Some(delta), Some(k)) => (1.0 + delta) * k as f64,
        _ => return Err(Error::InvalidParameter("give --n, or --delta with --k".into())),
    };
    if let Some(dev) = a.deviation {
        return emit(&a.common, &to_json(&tail_bounds(n, dev)?));
    }
    let (d1, d2) = default_window(n);
    let (n1, n2) = (a.n1.unwrap_or(d1), a.n2.unwrap_or(d2));
    let result = match (a.p_n1, a.p_n2) {
        (Some(p1), Some(p2)) => sandwich(p1, p2, n, n1, n2)?,
        _ => {
            let d = a.source.load(a.k)?;
            let k = a.k.unwrap_or(d.k());
            failure_sandwich(&d, k, n, Some((n1, n2)), &a.engine.options(false))?
        }
    };
    if result.degenerate {
        eprintln!("warning: degenerate window (n2 = n); upper bound set to 1");
    }
    emit(&a.common, &result.to_json())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let d = a.source.load(a.k)?;
    let params = a.count.params(a.k.unwrap_or(d.k()))?;
    let seed = match a.common.seed {
        Some(s) => s,
        None => {
            let s: u64 = rand::random();
            eprintln!("seed: {s}");
            s
        }
    };
    let opts = SimulationOptions {
        trials: a.trials,
        seed,
        mode: match a.mode {
            ModeArg::Poisson => SimulationMode::Poisson,
            ModeArg::FixedN => SimulationMode::FixedN,
        },
        jobs: a.jobs,
        keep_trajectories: 0,
    };
    let report = if a.csv.is_some() || a.trajectory_csv.is_some() {
        let profile = decoded_fraction_profile(&d, &params, &opts)?;
        if let Some(path) = &a.csv {
            let mut w = create(path)?;
            profile.write_histogram_csv(&mut w)?;
            w.flush()?;
        }
        if let Some(path) = &a.trajectory_csv {
            let mut w = create(path)?;
            profile.write_trajectory_csv(&mut w)?;
            w.flush()?;
        }
        profile.report
    } else {
        estimate_failure(&d, &params, &opts)?
    };
    emit(&a.common, &report.to_json())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::GenDist(a) => gen_dist(a),
        Command::Asymptotic(a) => asymptotic(a),
        Command::Finite(a) => finite(a),
        Command::Bounds(a) => bounds(a),
        Command::Simulate(a) => simulate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 1 } else { 2 })
        }
    }
}
