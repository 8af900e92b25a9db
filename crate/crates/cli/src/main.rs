//! `qct`: batch driver for the coin-tossing simulator.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 verification failure,
//! 1 for I/O errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qct_core::PauliLabel;

#[derive(Debug, Parser)]
#[command(name = "qct", version, about = "Entanglement-swapping coin tossing: simulate, attack, analyse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one honest session and print the coin and verdict.
    Toss {
        #[arg(long, default_value_t = 4)]
        n_pairs: usize,
        /// Per-measurement probability of a correct result.
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run many sessions under a cheating strategy.
    Cheat {
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 2)]
        n_pairs: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Pauli Bob applies to one returned particle (reflect only).
        #[arg(long, value_parser = parse_pauli)]
        flip: Option<PauliLabel>,
        /// Coin value Alice tries to obtain (fake-seq only).
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        desired: Option<u8>,
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate pass probabilities and minimum Γ for N = 1..n-pairs.
    Analyze {
        #[arg(long, default_value_t = 11)]
        n_pairs: u32,
        /// Pass-probability threshold for the min-gamma column.
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        /// Add Monte Carlo rows with this many reflect-attack trials per N.
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the symbolic engine against the statevector simulator.
    Verify {
        /// Largest number of pairs in the lemma checks (at most 8).
        #[arg(long, default_value_t = 4)]
        n_pairs: usize,
        /// Random measurement sequences in the lemma checks.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Samples per sampled-distribution check.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Negative control: check against a deliberately wrong residual rule.
        #[arg(long, hide = true)]
        inject_wrong_rule: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, env = "QCT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout (`toss`: write the transcript here).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Reflect,
    FakeSeq,
}

fn parse_pauli(s: &str) -> Result<PauliLabel, String> {
    s.parse().map_err(|e| format!("{e}; expected one of I, X, Y, Z"))
}

#[derive(Debug)]
enum CliError {
    Config(String),
    VerificationFailed,
    Io(std::io::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::VerificationFailed) => {
            eprintln!("verification failed");
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
