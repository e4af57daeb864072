//! The `ro-ac0` command-line tool: corpus handling, report emission and the
//! worker pool around the `ro_ac0` library.
//!
//! Every subcommand loads its circuits, runs the library operations on a
//! rayon pool of `--jobs` threads and collects results in input order, so
//! the data files depend only on the configuration and the master seed.

pub mod args;
mod commands;
pub mod corpus;
pub mod report;

use std::fmt;
use std::time::Instant;

pub use args::Cli;
pub use report::{Check, RunManifest, Sink};

/// Exit status for a run whose checks all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status when a mandatory check failed (or an I/O step broke).
pub const EXIT_FAIL: i32 = 1;
/// Exit status for bad flags, specs or circuit files.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: malformed circuit, corpus spec or parameter.
    Usage(String),
    /// Anything else that stopped the run.
    Failed(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Failed(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ro_ac0::Error> for CliError {
    fn from(e: ro_ac0::Error) -> Self {
        use ro_ac0::Error as E;
        match e {
            E::Parse(_)
            | E::NotReadOnce(_)
            | E::VariableOutOfRange { .. }
            | E::EmptyGate
            | E::LengthMismatch { .. }
            | E::CapExceeded { .. }
            | E::InvalidParameter(_)
            | E::IndexOutOfRange(_)
            | E::WidthMismatch(..)
            | E::VariableOverlap(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(e.into())
    }
}

/// Runs one invocation and returns its manifest.
pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Failed(e.into()))?;
    let mut sink = Sink::new(cli.out.clone())?;
    let checks = pool.install(|| commands::dispatch(cli, &mut sink))?;
    let manifest = RunManifest::new(
        cli,
        pool.current_num_threads(),
        sink.files().to_vec(),
        checks,
        started.elapsed(),
    );
    sink.finish(&manifest)?;
    Ok(manifest)
}

/// Parses `args`, runs and reports; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(manifest) => {
            for c in &manifest.checks {
                eprintln!("{}", c.summary_line());
            }
            if manifest.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}
