//! Command-line front end: fit observed series, synthesize data, tabulate
//! limit-law quantiles, and run the replication experiments. All output files
//! carry a provenance header and are deterministic given flags and seed.

pub mod args;
pub mod commands;
pub mod io;

use std::fmt;

/// Errors mapped to the front end's exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or bad input data (exit code 1).
    Validation(String),
    /// Filesystem trouble (exit code 2).
    Io(String),
    /// A result failed its own consistency checks (exit code 3).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Internal(m) => write!(f, "internal invariant violation: {m}"),
        }
    }
}

impl From<monotrend::Error> for CliError {
    fn from(e: monotrend::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Dispatches a parsed command line.
pub fn run(cli: args::Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        // Ignore the error if a global pool already exists (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        args::Command::Fit(a) => commands::fit(a, cli.verbose),
        args::Command::Simulate(a) => commands::simulate(a, cli.verbose),
        args::Command::Limits(a) => commands::limits(a, cli.verbose),
        args::Command::Tables(a) => commands::tables(a, cli.verbose),
        args::Command::Acf(a) => commands::acf(a, cli.verbose),
    }
}
