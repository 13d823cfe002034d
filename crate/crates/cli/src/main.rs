//! `re-kit`: replica-coupled solver toolkit CLI.
//!
//! Exit codes: 0 all runs solved / command completed, 1 completed with
//! unsolved runs, 2 error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rekit_core::harness::{
    emit_curves, fit_scaling, grid_search, read_records, run_experiment, write_json_atomic,
    ExperimentConfig, FitModel, GridPoint, RunStatus,
};

/// Output directories in configs are resolved under this root when they
/// are relative paths.
const OUTPUT_ROOT_VAR: &str = "RE_KIT_OUTPUT_ROOT";

#[derive(Parser)]
#[command(name = "re-kit", version, about = "Replica-coupled solvers for binary networks and K-SAT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Recompute and overwrite existing records
    #[arg(long)]
    force: bool,
    /// Dotted-path override, e.g. --set job.config.eta_prime=0.1
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated simulated annealing on a pattern set
    Rsa(RunArgs),
    /// Replicated stochastic gradient descent
    Rsgd(RunArgs),
    /// Belief propagation with focusing/reinforcement ramps
    Fbp(RunArgs),
    /// K-SAT message-passing solvers
    Ksat(RunArgs),
    /// Scaling fits over recorded iteration counts
    Fit {
        /// Directory of record files
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_parser = parse_fit_model, default_value = "power-law")]
        model: FitModel,
        /// Report file (JSON); stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flatten records into a CSV curve table
    Emit {
        #[arg(long)]
        records: PathBuf,
        /// rsa | rsgd | fbp | ksat
        #[arg(long)]
        kind: String,
        /// CSV file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter grid and rank the points
    Grid {
        #[arg(long)]
        config: PathBuf,
        /// Grid file (TOML): repeated [[point]] tables of overrides
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

fn parse_fit_model(s: &str) -> Result<FitModel, String> {
    match s {
        "power-law" => Ok(FitModel::PowerLaw),
        "stretched" => Ok(FitModel::Stretched),
        _ => Err(format!("unknown fit model {s:?} (power-law | stretched)")),
    }
}

fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = ExperimentConfig::from_toml_str(&text)?;
    for entry in overrides {
        let (key, value) = entry
            .split_once('=')
            .with_context(|| format!("override {entry:?} is not PATH=VALUE"))?;
        config = config.with_override(key.trim(), value.trim())?;
    }
    if config.output.is_relative() {
        if let Ok(root) = std::env::var(OUTPUT_ROOT_VAR) {
            config.output = PathBuf::from(root).join(&config.output);
        }
    }
    Ok(config)
}

/// Ok(true): all solved; Ok(false): completed with unsolved runs.
fn run(args: &RunArgs, algorithm: &str) -> Result<bool> {
    let config = load_config(&args.config, &args.overrides)?;
    if config.job.algorithm() != algorithm {
        bail!("config describes a {} job, invoked as {algorithm}", config.job.algorithm());
    }
    let records = run_experiment(&config, args.force)?;
    let mut solved = 0usize;
    for r in &records {
        let status = serde_json::to_value(r.status)?;
        println!("seed {:>6}  {:<13}  iterations {}", r.seed, status.as_str().unwrap_or("?"), r.iterations);
        solved += usize::from(r.status == RunStatus::Solved);
    }
    println!("{solved}/{} solved, records in {}", records.len(), config.output.display());
    Ok(solved == records.len())
}

fn parse_grid_file(path: &Path) -> Result<Vec<GridPoint>> {
    #[derive(serde::Deserialize)]
    struct GridFile {
        #[serde(default)]
        point: Vec<toml::Table>,
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: GridFile = toml::from_str(&text)?;
    Ok(file
        .point
        .into_iter()
        .map(|table| table.into_iter().map(|(k, v)| (k, v.to_string())).collect())
        .collect())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Rsa(args) => run(args, "rsa"),
        Command::Rsgd(args) => run(args, "rsgd"),
        Command::Fbp(args) => run(args, "fbp"),
        Command::Ksat(args) => run(args, "ksat"),
        Command::Fit { records, model, out } => {
            let report = fit_scaling(&read_records(records)?, *model)?;
            match out {
                Some(path) => write_json_atomic(path, &report)?,
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            Ok(true)
        }
        Command::Emit { records, kind, out } => {
            let records = read_records(records)?;
            match out {
                Some(path) => {
                    let mut buf = Vec::new();
                    emit_curves(&records, kind, &mut buf)?;
                    fs::write(path, buf)?;
                }
                None => emit_curves(&records, kind, std::io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::Grid { config, grid, force } => {
            let base = load_config(config, &[])?;
            let points = parse_grid_file(grid)?;
            let report = grid_search(&base, &points, *force)?;
            for e in &report.ranking {
                println!(
                    "grid point {:>3}: success {:.2}, mean iterations {}, overrides {:?}",
                    e.index,
                    e.success_rate,
                    e.mean_iterations.map_or("-".into(), |m| format!("{m:.1}")),
                    e.overrides
                );
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
