//! `awi`: runs the AWI/MSWI experiments from a TOML scenario and writes CSV
//! artifacts plus a `manifest.toml` that reproduces the run.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use awi_core::AwiError;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "awi", version, about = "Adaptive and matched-source waveform inversion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario config or a previous run's manifest.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override any config key, e.g. `--set scan.points=101`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Predicted and observed gathers at every λ.
    Generate,
    /// Per-trace matching filters with diagnostics.
    Filter,
    /// FWI, AWI and MSWI reports at every λ.
    Objective,
    SweepLambda,
    SweepSigma,
    /// Effect of the smooth remainder on filters and J_AWI.
    Remainder,
    PenaltyLimit,
    /// One-parameter objective scan around the observed medium.
    Scan,
    /// Local descent under AWI and FWI.
    Descent,
    MultiArrival,
    /// Quick invariant checks; exits 0 on a correct build.
    Selftest,
}

impl Command {
    pub fn name(self) -> String {
        Cli::command()
            .get_subcommands()
            .map(|c| c.get_name().to_string())
            .find(|n| n.replace('-', "") == format!("{self:?}").to_lowercase())
            .unwrap_or_default()
    }
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<AwiError> for CliError {
    fn from(e: AwiError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    ExitCode::from(64)
                }
                _ => {
                    let _ = e.print();
                    ExitCode::from(2)
                }
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("awi {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let mut cfg = match &cli.config {
        Some(path) => config::load(path, &cli.sets)?,
        None => config::from_sets(&cli.sets)?,
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    cfg.out = std::path::absolute(&cfg.out).unwrap_or_else(|_| cfg.out.clone());
    cfg.validate()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    let loaded = start.elapsed();

    let outcome = commands::run(cli.command, &cfg);
    let computed = start.elapsed();
    // Write what was produced even when a check failed, then report.
    let (outputs, result) = match outcome {
        Ok(o) => (o, Ok(())),
        Err(commands::Failure { outputs, error }) => (outputs, Err(error)),
    };
    let mut names = Vec::with_capacity(outputs.len());
    for (name, text) in &outputs {
        awi_core::io::write_text(&cfg.out.join(name), text)?;
        names.push(name.clone());
    }
    let written = start.elapsed();
    let manifest = commands::manifest(cli.command, &cfg, &names, [loaded, computed - loaded, written - computed, written]);
    awi_core::io::write_text(&cfg.out.join("manifest.toml"), &manifest)?;
    result
}
