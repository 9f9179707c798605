//! `dp2`: command-line driver for the dp2 library.
//!
//! Exit codes: 0 success, 1 failed verification or I/O error, 2 invalid
//! configuration, 3 numerical failure.

mod cmd;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Entries;
use crate::error::CliError;
use crate::output::{Format, Output};

#[derive(Debug, Parser)]
#[command(
    name = "dp2",
    version,
    about = "Self-similar solutions, Emden dynamics and blowup experiments for the DP2 system"
)]
struct Cli {
    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Settings file: `key = value` lines or JSON (a previous summary works).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized inputs (`solve --noise`, random sweeps).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// What to print on stdout: the JSON summary or the main CSV table.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the Emden equation and report the fate of the scale factor.
    #[command(allow_negative_numbers = true)]
    Emden(cmd::emden::Flags),
    /// Snapshots and mass history of a self-similar solution.
    #[command(allow_negative_numbers = true)]
    Selfsim(cmd::selfsim::Flags),
    /// Residual convergence study of a self-similar solution.
    #[command(allow_negative_numbers = true)]
    Verify(cmd::verify::Flags),
    /// Blowup-time bound from the slope comparison equation.
    #[command(allow_negative_numbers = true)]
    Riccati(cmd::riccati::Flags),
    /// Spectral blowup experiment with odd initial data.
    #[command(allow_negative_numbers = true)]
    Solve(cmd::solve::Flags),
    /// Emden fates over a parameter lattice or random sample.
    #[command(allow_negative_numbers = true)]
    Sweep(cmd::sweep::Flags),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => config::load(path)?,
        None => Entries::new(),
    };
    let out = Output::new(cli.out, cli.format);
    match cli.command {
        Command::Emden(f) => cmd::emden::run(config::resolve(file, &f)?, &out),
        Command::Selfsim(f) => cmd::selfsim::run(config::resolve(file, &f)?, &out),
        Command::Verify(f) => cmd::verify::run(config::resolve(file, &f)?, &out),
        Command::Riccati(f) => cmd::riccati::run(config::resolve(file, &f)?, &out),
        Command::Solve(mut f) => {
            f.seed = cli.seed;
            cmd::solve::run(config::resolve(file, &f)?, &out)
        }
        Command::Sweep(mut f) => {
            f.seed = cli.seed;
            cmd::sweep::run(config::resolve(file, &f)?, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dp2: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
