//! Command-line front end: runs experiments from JSON specs or built-in
//! presets and writes CSV tables plus a reproducibility manifest.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use hbnoma::montecarlo::{preset, run_experiment, run_experiment_with_threads, ExperimentSpec, ResultTable, PRESETS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hbnoma", version, about = "Hybrid-beamforming NOMA downlink simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment described by a JSON spec.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a built-in figure preset.
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        preset: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a JSON spec without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print (or write) the JSON spec of a built-in preset.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
struct Overrides {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<hbnoma::Error> for CliError {
    fn from(e: hbnoma::Error) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

/// Parses a spec, reporting the field path and position of any error.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.inner();
        CliError::Config(format!(
            "line {} column {}, field `{}`: {}",
            inner.line(),
            inner.column(),
            e.path(),
            inner
        ))
    })?;
    spec.validate()?;
    Ok(spec)
}

fn load_spec(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_spec(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scenario_id: &'a str,
    sweep_name: &'a str,
    sweep_value: f64,
    cluster: usize,
    user: usize,
    rate_exact: f64,
    rate_lb_thm1: f64,
    rate_lb_thm2: f64,
    rate_gap: f64,
    gap_ub_thm3: f64,
    rho_mean: f64,
    stderr: f64,
    trials: usize,
}

#[derive(Serialize)]
struct SumRateCsvRow<'a> {
    snr_db: f64,
    system: &'a str,
    sum_rate_bps_hz: f64,
}

/// Per-user table. Cluster and user indices are written one-based.
pub fn results_csv(table: &ResultTable) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in &table.rows {
        w.serialize(CsvRow {
            scenario_id: &r.scenario_id,
            sweep_name: &r.sweep_name,
            sweep_value: r.sweep_value,
            cluster: r.cluster + 1,
            user: r.user + 1,
            rate_exact: r.rate_exact,
            rate_lb_thm1: r.rate_lb_thm1,
            rate_lb_thm2: r.rate_lb_thm2,
            rate_gap: r.rate_gap,
            gap_ub_thm3: r.gap_ub_thm3,
            rho_mean: r.rho_mean,
            stderr: r.stderr,
            trials: r.trials,
        })
        .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if table.rows.is_empty() {
        w.write_record([
            "scenario_id", "sweep_name", "sweep_value", "cluster", "user", "rate_exact", "rate_lb_thm1",
            "rate_lb_thm2", "rate_gap", "gap_ub_thm3", "rho_mean", "stderr", "trials",
        ])
        .map_err(|e| CliError::Config(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Config(e.to_string()))
}

/// Sum-rate table, one row per (SNR, system).
pub fn sum_rate_csv(table: &ResultTable) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if table.sum_rates.is_empty() {
        w.write_record(["snr_db", "system", "sum_rate_bps_hz"])
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    for r in &table.sum_rates {
        w.serialize(SumRateCsvRow {
            snr_db: r.sweep_value,
            system: &r.system,
            sum_rate_bps_hz: r.sum_rate,
        })
        .map_err(|e| CliError::Config(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Config(e.to_string()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn apply(spec: &mut ExperimentSpec, o: &Overrides) -> Result<(), CliError> {
    if let Some(t) = o.trials {
        spec.trials = t;
    }
    if let Some(s) = o.seed {
        spec.seed = s;
    }
    spec.validate()?;
    Ok(())
}

fn execute(spec: &ExperimentSpec, threads: Option<usize>, out: &Path, sum_rate_primary: bool, command: &str) -> Result<(), CliError> {
    let start = Instant::now();
    let table = match threads {
        Some(t) => run_experiment_with_threads(spec, t)?,
        None => run_experiment(spec)?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    let mut outputs = vec![out.display().to_string()];
    if sum_rate_primary {
        write(out, &sum_rate_csv(&table)?)?;
    } else {
        write(out, &results_csv(&table)?)?;
        if !table.sum_rates.is_empty() {
            let p = with_suffix(out, ".sum_rate.csv");
            write(&p, &sum_rate_csv(&table)?)?;
            outputs.push(p.display().to_string());
        }
    }
    let cells: Vec<_> = table
        .cells
        .iter()
        .map(|c| {
            json!({
                "scenario_id": c.scenario_id,
                "misalignment_deg": c.misalignment_deg,
                "sweep_value": c.sweep_value,
                "trials_requested": c.trials_requested,
                "trials_used": c.trials_used,
                "excluded": c.excluded,
                "exclusion_rate": c.exclusion_rate(),
            })
        })
        .collect();
    let manifest = json!({
        "tool": "hbnoma",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": spec.seed,
        "trials": spec.trials,
        "threads": threads.unwrap_or_else(rayon_threads),
        "wall_clock_s": elapsed,
        "outputs": outputs,
        "cells": cells,
        "config": spec,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    write(&with_suffix(out, ".manifest.json"), format!("{text}\n").as_bytes())
}

fn rayon_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, overrides } => {
            let mut spec = load_spec(&config)?;
            apply(&mut spec, &overrides)?;
            execute(&spec, overrides.threads, &out, false, "run")
        }
        Command::Figure { preset: name, out, overrides } => {
            let mut spec = preset(&name)?;
            apply(&mut spec, &overrides)?;
            execute(&spec, overrides.threads, &out, name == "fig5", "figure")
        }
        Command::Validate { config } => {
            let spec = load_spec(&config)?;
            println!("{}: ok ({} cells)", config.display(), spec.cells()?.len());
            Ok(())
        }
        Command::Preset { name, out } => {
            let spec = preset(&name)?;
            let text = serde_json::to_string_pretty(&spec).map_err(|e| CliError::Config(e.to_string()))?;
            match out {
                Some(p) => write(&p, format!("{text}\n").as_bytes()),
                None => {
                    println!("{text}");
                    Ok(())
                }
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
