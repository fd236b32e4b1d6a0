//! `singularcs` command-line driver.
//!
//! Each subcommand reads an optional JSON config (`--config`), applies the
//! global overrides, validates everything, runs, and writes its report
//! `<command>.json` plus CSV tables into `--out`. On failure an error
//! document is printed to stderr and written to `<out>/error.json`; files
//! completed before the failure are kept.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use singularcs::SCHEMA_VERSION;
use thiserror::Error;

use crate::report::{ErrorBody, ErrorReport, Sink};

const SCHEMA: &str = include_str!("../schema/config.schema.json");

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] singularcs::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config(_) => "InvalidConfig",
            CliError::Io(_) => "Io",
            CliError::Json(_) => "Json",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub fn core<E: Into<singularcs::Error>>(e: E) -> CliError {
    CliError::Core(e.into())
}

#[derive(Parser)]
#[command(name = "singularcs", version, about = "Strongly singular Cucker-Smale simulation and verification lab")]
struct Cli {
    /// JSON config for the subcommand; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the sampling seed (simulate, mfstudy) or battery seed
    /// (residual).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the integrator tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample initial data, integrate, and write the trajectory and its
    /// diagnostics series.
    Simulate,
    /// Bounded-Lipschitz distance between two measure CSV files.
    Dbl { a: PathBuf, b: PathBuf },
    /// Diagnostics report for a trajectory CSV.
    Diagnose { trajectory: PathBuf },
    /// Weak-form residuals for a trajectory CSV or a JSON list of fields.
    Residual { input: PathBuf },
    /// N-refinement study.
    Mfstudy,
    /// Two-particle alignment-time study.
    Pairstudy,
    /// Print the JSON schema of the config documents.
    Schema,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Dbl { .. } => "dbl",
            Command::Diagnose { .. } => "diagnose",
            Command::Residual { .. } => "residual",
            Command::Mfstudy => "mfstudy",
            Command::Pairstudy => "pairstudy",
            Command::Schema => "schema",
        }
    }

    fn inputs(&self) -> Vec<&Path> {
        match self {
            Command::Dbl { a, b } => vec![a, b],
            Command::Diagnose { trajectory } => vec![trajectory],
            Command::Residual { input } => vec![input],
            _ => Vec::new(),
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else {
        return Ok(());
    };
    if n == 0 {
        return Err(CliError::Config("--threads must be >= 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    Ok(())
}

fn run(cli: &Cli, sink: &mut Option<Sink>) -> Result<(), CliError> {
    let sink = sink.insert(Sink::new(&cli.out)?);
    for path in cli.command.inputs() {
        if !path.is_file() {
            return Err(CliError::Config(format!("input file {} does not exist", path.display())));
        }
    }
    if let Some(path) = &cli.config {
        if !path.is_file() {
            return Err(CliError::Config(format!("config file {} does not exist", path.display())));
        }
    }
    if let Some(tol) = cli.tol {
        config::check_positive("--tol", tol)?;
    }
    configure_threads(cli.threads)?;
    let cfg_path = cli.config.as_deref();

    match &cli.command {
        Command::Simulate => {
            let mut cfg: config::SimulateConfig = config::load(cfg_path)?;
            if let Some(seed) = cli.seed {
                cfg.initial.seed = seed;
            }
            if let Some(tol) = cli.tol {
                cfg.options.tol = tol;
            }
            commands::simulate(&cfg, sink)
        }
        Command::Dbl { a, b } => {
            let cfg: config::DblConfig = config::load(cfg_path)?;
            commands::dbl(a, b, &cfg, sink)
        }
        Command::Diagnose { trajectory } => {
            let cfg: config::DiagnoseConfig = config::load(cfg_path)?;
            commands::diagnose(trajectory, &cfg, sink)
        }
        Command::Residual { input } => {
            let mut cfg: config::ResidualConfig = config::load(cfg_path)?;
            if let Some(seed) = cli.seed {
                cfg.battery_seed = seed;
            }
            commands::residual(input, &cfg, sink)
        }
        Command::Mfstudy => {
            let mut cfg: config::MfstudyConfig = config::load(cfg_path)?;
            if let Some(seed) = cli.seed {
                cfg.spec.seed = seed;
            }
            if let Some(tol) = cli.tol {
                cfg.options.tol = tol;
            }
            commands::mfstudy(&cfg, sink)
        }
        Command::Pairstudy => {
            let mut cfg: config::PairstudyConfig = config::load(cfg_path)?;
            if let Some(tol) = cli.tol {
                cfg.options.tol = tol;
            }
            commands::pairstudy(&cfg, sink)
        }
        Command::Schema => unreachable!("handled before output setup"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Schema = cli.command {
        print!("{SCHEMA}");
        return ExitCode::SUCCESS;
    }
    let mut sink = None;
    match run(&cli, &mut sink) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let partial = sink.as_ref().map(|s| s.written.clone()).unwrap_or_default();
            let doc = ErrorReport {
                schema_version: SCHEMA_VERSION,
                command: cli.command.name(),
                generated_at: report::timestamp(),
                status: "error",
                error: ErrorBody {
                    kind: e.kind(),
                    message: e.to_string(),
                },
                partial: &partial,
            };
            if let Ok(line) = serde_json::to_string(&doc) {
                eprintln!("{line}");
            }
            if let Some(s) = sink.as_mut() {
                let _ = s.json("error.json", &doc);
            }
            ExitCode::from(e.exit_code())
        }
    }
}
