//! `regionlab`: experiment-runner front end.
//!
//! One subcommand per artifact family; declarative JSON configs in, CSV /
//! PGM / JSON artifacts plus a hashed manifest out. Exit codes: 0 success,
//! 1 runtime failure, 2 configuration error.

mod commands;
mod config;
mod figures;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "regionlab",
    about = "Feature-space laboratory for sigmoidal feedforward networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (defaults to the config's `out_dir`, then `out/<cmd>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample per-point quantities of a network over a 2-D grid.
    Field(RunArgs),
    /// Run a training experiment preset and export its report.
    Train(RunArgs),
    /// Realize Boolean region pipelines or count arrangement regions.
    Regions(RunArgs),
    /// Reach maps and fractions for bound-gated partial backpropagation.
    Partialbp(RunArgs),
    /// Generate and verify a maximal-separation subspace family.
    Tverberg(RunArgs),
}

fn run(cli: Cli) -> CliResult<PathBuf> {
    match cli.command {
        Command::Field(a) => commands::cmd_field(&a.config, a.seed, a.out),
        Command::Train(a) => commands::cmd_train(&a.config, a.seed, a.out),
        Command::Regions(a) => commands::cmd_regions(&a.config, a.seed, a.out),
        Command::Partialbp(a) => commands::cmd_partialbp(&a.config, a.seed, a.out),
        Command::Tverberg(a) => commands::cmd_tverberg(&a.config, a.seed, a.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(manifest) => {
            println!("wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
