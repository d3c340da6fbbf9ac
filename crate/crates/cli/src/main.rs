//! `dualcell`: simulate, sweep and analyse the dual-cell feedback-coupled
//! Bloch system.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, interrupted sweep),
//! 2 usage or configuration error, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::SweepRun;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dualcell", version, about = "Dual-cell feedback-coupled Bloch simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration, or any table written by this program.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Set a configuration value, e.g. `system.dfreq_hz=110`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct WithOut {
    #[command(flatten)]
    common: Common,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one parameter point and write trajectory, spectrum,
    /// Poincaré section and regime label.
    Simulate(WithOut),
    /// Classify a grid over (Δf, α/α_c), resuming from `<out>/sweep.ckpt`.
    Sweep {
        #[command(flatten)]
        args: WithOut,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// Ignore and replace an existing checkpoint.
        #[arg(long)]
        fresh: bool,
        /// Stop after computing this many new points.
        #[arg(long, hide = true)]
        stop_after: Option<usize>,
    },
    /// Spectral robustness Q against field noise for each configured point.
    Robustness(WithOut),
    /// Print the 0–1 test statistic K of a one- or two-column table.
    ChaosTest {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("seed={seed}"));
    }
    match &common.config {
        Some(path) => RunConfig::load(path, &overrides),
        None => RunConfig::defaults_with(&overrides),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = load(&a.common)?;
            println!("{}", commands::simulate(&cfg, &a.out)?);
        }
        Command::Sweep {
            args,
            workers,
            fresh,
            stop_after,
        } => {
            let cfg = load(&args.common)?;
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            if workers == 0 {
                return Err(CliError::Usage("--workers must be at least 1".into()));
            }
            let run = SweepRun {
                workers,
                fresh,
                stop_after,
            };
            println!("{}", commands::sweep(&cfg, &args.out, &run)?);
        }
        Command::Robustness(a) => {
            let cfg = load(&a.common)?;
            println!("{}", commands::robustness(&cfg, &a.out)?);
        }
        Command::ChaosTest { input, common } => {
            let cfg = load(&common)?;
            println!("{:.4}", commands::chaos_test(&cfg, &input)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
