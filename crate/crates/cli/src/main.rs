mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use stla_core::{Error, ExprError};

use crate::args::{Cli, Command};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_DEGENERATE: u8 = 4;
pub const EXIT_DIVERGED: u8 = 5;
pub const EXIT_UNREACHED: u8 = 6;
pub const EXIT_SCAN_FAILED: u8 = 7;

#[derive(Debug)]
pub enum CliError {
    Message(String),
    Core(Error),
    Io(String, std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Core(Error::Expr(ExprError::Domain { .. })) => EXIT_DOMAIN,
            CliError::Core(Error::IntegrationDiverged { .. }) => EXIT_DIVERGED,
            _ => EXIT_INPUT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Message(m) => write!(f, "{m}"),
            CliError::Core(Error::IntegrationDiverged { time, last_state }) => write!(
                f,
                "integration diverged at t = {time}; last finite state {}",
                stla_core::format::short_vec(last_state)
            ),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{path}: {e}"),
        }
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("STLA_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring STLA_THREADS={v}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            });
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Mintime(a) => commands::mintime(a),
        Command::Scan(a) => commands::scan(a),
        Command::Examples(a) => commands::examples(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
