//! Command-line front end: `run`, `sweep` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 runtime failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ConfigSource;
use crate::observables::{compare_runs, efficiency, fmt_f64, sink_quadrature_deviation, TimeSeries};
use crate::verify::{self, VerifyOptions};

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

const MAX_SWEEP_AXES: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "pmtransport", version, about = "Excitation transport through XY chains sharing a Lorentzian reservoir")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one configuration.
    Run(RunArgs),
    /// Run a grid of configurations and compare their sink populations.
    Sweep(SweepArgs),
    /// Run the built-in consistency checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Override a configuration value, e.g. `system.n_chains=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sweep axis `KEY=V1,V2,...`; up to three, combined as a full grid.
    #[arg(long = "param", value_name = "KEY=V1,V2,...", required = true)]
    pub params: Vec<String>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest reservoir grid for the discretized-bath checks.
    #[arg(long, default_value_t = verify::DEFAULT_BATH_MODES)]
    pub bath_modes: usize,
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Parses arguments from the process, runs the command, and maps the outcome
/// to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidSpec(_)
        | Error::DimensionCap { .. }
        | Error::SpectralDensity(_)
        | Error::GridMismatch(..) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

pub fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run(args) => run(&args.common).map(|_| 0),
        Command::Sweep(args) => with_pool(args.jobs, || sweep(&args)).map(|_| 0),
        Command::Verify(args) => with_pool(args.jobs, || verify_command(&args)),
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn load(config: &Path, overrides: &[String]) -> Result<ConfigSource> {
    let mut source = ConfigSource::read(config).map_err(|e| match e {
        Error::Io { .. } => Error::Config(e.to_string()),
        other => other,
    })?;
    for o in overrides {
        source.set(o)?;
    }
    Ok(source)
}

fn run(args: &CommonArgs) -> Result<TimeSeries> {
    let source = load(&args.config, &args.overrides)?;
    let (_, resolved) = source.resolve()?;
    let ts = crate::simulate(&resolved)?;
    write_outputs(&args.out, &ts)?;
    println!("p_sink_final = {}", fmt_f64(efficiency(&ts).p_sink_final));
    Ok(ts)
}

fn write_outputs(dir: &Path, ts: &TimeSeries) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    ts.write_csv(&dir.join("timeseries.csv"))?;
    let path = dir.join("report.csv");
    fs::write(&path, report_csv(ts)).map_err(|e| Error::io(&path, e))
}

/// Two-column `key,value` summary of a run.
pub fn report_csv(ts: &TimeSeries) -> String {
    let eff = efficiency(ts);
    let index = ts.index;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let rows: Vec<(&str, String)> = vec![
        ("n_chains", index.n_chains.to_string()),
        ("chain_len", index.chain_len.to_string()),
        ("n_pseudomodes", index.n_pseudomodes.to_string()),
        ("dimension", index.dim().to_string()),
        ("t_final", fmt_f64(ts.t_final())),
        ("p_sink_final", fmt_f64(eff.p_sink_final)),
        ("t_half", eff.t_half.map(fmt_f64).unwrap_or_default()),
        ("sink_auc", fmt_f64(eff.auc)),
        ("sink_quadrature_deviation", sink_quadrature_deviation(ts).map(fmt_f64).unwrap_or_default()),
        ("max_trace_error", fmt_f64(max(&ts.trace_error))),
        ("max_hermiticity_error", fmt_f64(max(&ts.hermiticity_error))),
        ("min_eigenvalue", fmt_f64(ts.min_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min))),
    ];
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

/// One sweep axis: a dotted configuration key and its values as JSON text.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

impl SweepAxis {
    pub fn parse(arg: &str) -> Result<Self> {
        let (key, values) = arg
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep axis `{arg}` is not KEY=V1,V2,...")))?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if key.is_empty() || values.is_empty() {
            return Err(Error::Config(format!("sweep axis `{arg}` has no key or no values")));
        }
        Ok(SweepAxis { key: key.trim().to_string(), values })
    }

    /// Last component of the key, used in run identifiers.
    pub fn short_name(&self) -> &str {
        self.key.rsplit('.').next().unwrap_or(&self.key)
    }
}

/// A single grid point: the overrides that define it and its identifier.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub id: String,
    pub assignments: Vec<String>,
}

/// Full Cartesian grid, first axis varying slowest.
pub fn sweep_grid(axes: &[SweepAxis]) -> Result<Vec<GridPoint>> {
    if axes.len() > MAX_SWEEP_AXES {
        return Err(Error::Config(format!("at most {MAX_SWEEP_AXES} sweep axes are supported, got {}", axes.len())));
    }
    let mut grid = vec![GridPoint { id: String::new(), assignments: Vec::new() }];
    for axis in axes {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let tag = format!("{}={}", axis.short_name(), v);
                    let id = if p.id.is_empty() { tag } else { format!("{}_{tag}", p.id) };
                    let mut assignments = p.assignments.clone();
                    assignments.push(format!("{}={}", axis.key, v));
                    GridPoint { id, assignments }
                })
            })
            .collect();
    }
    Ok(grid)
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let axes: Vec<SweepAxis> = args.params.iter().map(|p| SweepAxis::parse(p)).collect::<Result<_>>()?;
    let grid = sweep_grid(&axes)?;
    let base = load(&args.common.config, &args.common.overrides)?;
    // Resolve everything before running anything.
    let resolved = grid
        .iter()
        .map(|p| {
            let mut source = base.clone();
            for a in &p.assignments {
                source.set(a)?;
            }
            source.resolve().map(|(_, r)| r).map_err(|e| Error::Config(format!("{}: {e}", p.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    let runs = grid
        .par_iter()
        .zip(&resolved)
        .map(|(p, r)| {
            info!("running {}", p.id);
            let ts = crate::simulate(r).map_err(|e| tag_error(&p.id, e))?;
            write_outputs(&args.common.out.join(&p.id), &ts)?;
            Ok(ts)
        })
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = grid.iter().map(|p| p.id.clone()).collect();
    let table = compare_runs(&runs, &labels)?;
    table.write_csv(&args.common.out.join("comparison.csv"))?;
    for (label, p) in labels.iter().zip(table.finals()) {
        println!("{label}: p_sink_final = {}", fmt_f64(p));
    }
    Ok(())
}

fn tag_error(id: &str, err: Error) -> Error {
    match err {
        Error::Invariant { time, detail } => Error::Invariant { time, detail: format!("{id}: {detail}") },
        other => other,
    }
}

fn verify_command(args: &VerifyArgs) -> Result<u8> {
    let results = verify::run_all(&VerifyOptions { bath_modes: args.bath_modes });
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} checks passed", results.len() - failed, results.len());
    Ok(if failed == 0 { 0 } else { EXIT_VERIFY })
}
