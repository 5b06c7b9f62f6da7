//! Command-line experiment runner.
//!
//! Exit codes: 0 success, 1 validation or input error, 2 a requested check
//! failed.

mod config;
mod gap;
mod online;
mod output;
mod privacy;
mod separation;
mod source;
mod stability;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] gaussftpl::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// What a command reports back once its files are written.
pub struct Outcome {
    pub summary: String,
    /// `false` when a requested check failed.
    pub passed: bool,
}

#[derive(Parser, Debug)]
#[command(
    name = "gaussftpl",
    version,
    about = "Gaussian FTPL and perturbed-ERM experiments",
    args_override_self = true
)]
struct Cli {
    /// Directory receiving every output file.
    #[arg(long, global = true, env = "GAUSSFTPL_OUT", default_value = "gaussftpl-out")]
    out: PathBuf,

    /// JSON object of flag values; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Separation analytics of a class.
    Separation(separation::SeparationArgs),
    /// Multi-seed FTPL runs with regret and be-the-leader summaries.
    Online(online::OnlineArgs),
    /// Private learner, sample calculators and privacy audit.
    Privacy(privacy::PrivacyArgs),
    /// Argmin-stability verification on a fixture.
    Stability(stability::StabilityArgs),
    /// Hadamard full-domain versus basis-domain experiment and bound curves.
    HadamardGap(gap::GapArgs),
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Separation(a) => separation::run(&a, &cli.out),
        Command::Online(a) => online::run(&a, &cli.out),
        Command::Privacy(a) => privacy::run(&a, &cli.out),
        Command::Stability(a) => stability::run(&a, &cli.out),
        Command::HadamardGap(a) => gap::run(&a, &cli.out),
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(o) if o.passed => {
            println!("{}", o.summary);
            ExitCode::SUCCESS
        }
        Ok(o) => {
            println!("{}", o.summary);
            eprintln!("check failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
