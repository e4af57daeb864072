mod bench;
mod bounds;
mod bp;
mod describe;
mod fourier;
mod prg;
mod shrink;

use rayon::prelude::*;

use crate::args::Command;
use crate::corpus::Entry;
use crate::report::{Check, Sink};
use crate::{Cli, CliError};

pub(crate) fn dispatch(cli: &Cli, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    match &cli.command {
        Command::Describe(a) => describe::run(a, sink),
        Command::Fourier(a) => fourier::run(a, sink),
        Command::Bounds(a) => bounds::run(a, sink),
        Command::Bp(a) => bp::run(&a.action, cli.seed, sink),
        Command::Prg(a) => prg::run(a, cli.seed, sink),
        Command::Shrink(a) => shrink::run(a, cli.seed, sink),
        Command::Bench(a) => bench::run(a, cli.seed, sink),
    }
}

/// Maps `f` over the corpus on the current pool, keeping input order.
fn par_map<R, F>(entries: &[Entry], f: F) -> Result<Vec<R>, CliError>
where
    R: Send,
    F: Fn(usize, &Entry) -> Result<R, CliError> + Sync,
{
    entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| f(i, e))
        .collect()
}

/// Default error term `1/n`.
fn default_eps(n: usize) -> f64 {
    1.0 / n.max(1) as f64
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be a positive number, got {v}"
        )))
    }
}
