//! `qcover`: command-line access to the quantum cover toolkit.
//!
//! Every subcommand prints one JSON report (to `--out` or stdout) that embeds
//! the parsed configuration. Exit codes: 0 success, 2 invalid input,
//! 3 mathematical counterexample, 4 internal assertion failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Parser, Serialize)]
#[command(name = "qcover", version, about = "Quantum measures, quantum covers and the Peres set")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Number of histories.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Level, or the family parameter for `antichain generate`.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_zero: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_psd: f64,
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Exact rational arithmetic on the input matrix.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Replace the input matrix by its Hermitian part instead of rejecting it.
    #[arg(long, global = true)]
    pub hermitize: bool,
    /// Decoherence matrix JSON file.
    #[arg(long, global = true)]
    pub dmatrix: Option<PathBuf>,
    /// Antichain JSON file.
    #[arg(long, global = true)]
    pub antichain: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Identity and inequality suite over seeded strongly positive functionals.
    Identities,
    /// Hermiticity, positivity, normalisation and measure level of a matrix.
    Validate,
    /// Quantum measure of events (all events when none are given).
    Measure {
        /// Event as comma-separated labels, e.g. `1,3`. Repeatable.
        #[arg(long = "event")]
        events: Vec<String>,
    },
    /// Exact span test of a family of events, with certificate when inextendible.
    CoverCheck,
    /// Decide every inextendible antichain of size n.
    Scan {
        /// Largest n accepted for enumeration.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Zero sets, primitive preclusive supports and the derived antichain.
    Coevents,
    /// Inextendible antichains.
    Antichain {
        #[command(subcommand)]
        action: AntichainAction,
    },
    /// The Peres 33-ray set and its PKS events.
    Pks {
        #[command(subcommand)]
        action: PksAction,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AntichainAction {
    Enumerate {
        #[arg(long)]
        limit: Option<usize>,
    },
    Classify,
    Generate {
        #[arg(long, value_enum)]
        kind: Family,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    LevelK,
    A1,
    A2,
    A3,
    A4,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PksAction {
    Rays,
    Bases,
    Search,
    Witness,
}

/// How a command ended, mapped onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Invalid,
    Counterexample,
    Internal,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Invalid => 2,
            Status::Counterexample => 3,
            Status::Internal => 4,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Invalid,
            message: message.into(),
        }
    }
}

impl From<qcover::Error> for Failure {
    fn from(e: qcover::Error) -> Self {
        let status = match e {
            qcover::Error::Consistency(_) | qcover::Error::Internal(_) => Status::Internal,
            _ => Status::Invalid,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn emit(cli: &Cli, result: Value, elapsed_ms: u64) -> Result<(), Failure> {
    let report = json!({
        "config": cli,
        "result": result,
        "elapsed_ms": elapsed_ms,
    });
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure {
            status: Status::Internal,
            message: format!("cannot serialize report: {e}"),
        })?;
    text.push('\n');
    match &cli.common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = commands::run(&cli).and_then(|(result, status)| {
        emit(&cli, result, start.elapsed().as_millis() as u64)?;
        Ok(status)
    });
    match outcome {
        Ok(status) => ExitCode::from(status.code()),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.status.code())
        }
    }
}
