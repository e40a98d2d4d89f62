//! `qilab`: run the vacuum-energy experiments and write CSV/JSON outputs plus
//! a reproducibility manifest.
//!
//! Exit codes: 0 success, 1 numerical non-convergence or replay mismatch,
//! 2 invalid input.

mod args;
mod manifest;
mod run;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Usage(_) => 2,
                Failure::Numeric(_) => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<qilab::Error>() {
            return match e {
                qilab::Error::NotConverged { .. } | qilab::Error::FixedPoint(_) => 1,
                _ => 2,
            };
        }
    }
    // I/O and serialization problems.
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
