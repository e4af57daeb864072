//! Output files, pass/fail bookkeeping and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::{Cli, CliError};

/// Failures listed by name in a [`Check`]; the count is always exact.
const LISTED_FAILURES: usize = 20;

/// Receives the data files of a run. Without an output directory the JSON
/// documents go to stdout and CSV tables are dropped.
#[derive(Debug)]
pub struct Sink {
    out: Option<PathBuf>,
    files: Vec<String>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(dir) = &out {
            fs::create_dir_all(dir)?;
        }
        Ok(Sink {
            out,
            files: Vec::new(),
        })
    }

    /// Names of the data files written so far.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        match &self.out {
            Some(dir) => {
                let mut w = BufWriter::new(File::create(dir.join(name))?);
                serde_json::to_writer_pretty(&mut w, value)?;
                writeln!(w)?;
                w.flush()?;
                self.files.push(name.to_string());
            }
            None => {
                let stdout = std::io::stdout();
                let mut w = stdout.lock();
                serde_json::to_writer_pretty(&mut w, value)?;
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        if let Some(dir) = &self.out {
            let mut w = csv::Writer::from_path(dir.join(name))?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
            self.files.push(name.to_string());
        }
        Ok(())
    }

    /// Writes `run.json` when there is an output directory.
    pub fn finish(&self, manifest: &RunManifest) -> Result<(), CliError> {
        if let Some(dir) = &self.out {
            let mut w = BufWriter::new(File::create(dir.join("run.json"))?);
            serde_json::to_writer_pretty(&mut w, manifest)?;
            writeln!(w)?;
            w.flush()?;
        }
        Ok(())
    }
}

/// A named pass/fail tally over the items of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub total: usize,
    pub failed: usize,
    /// The first few failing items.
    pub failures: Vec<String>,
}

impl Check {
    pub fn new(name: &str) -> Self {
        Check {
            name: name.to_string(),
            total: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    pub fn record(&mut self, item: &str, pass: bool) {
        self.total += 1;
        if !pass {
            self.failed += 1;
            if self.failures.len() < LISTED_FAILURES {
                self.failures.push(item.to_string());
            }
        }
    }

    pub fn pass(&self) -> bool {
        self.failed == 0
    }

    pub fn summary_line(&self) -> String {
        let tag = if self.pass() { "PASS" } else { "FAIL" };
        let mut line = format!(
            "[{tag}] {}: {}/{}",
            self.name,
            self.total - self.failed,
            self.total
        );
        if !self.failures.is_empty() {
            line.push_str(&format!(" (failing: {})", self.failures.join(", ")));
        }
        line
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub jobs: usize,
    pub wall_time_s: f64,
}

/// `run.json`: what ran, which files it wrote and which checks passed.
/// Timing lives only here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub files: Vec<String>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub runtime: Runtime,
}

impl RunManifest {
    pub fn new(
        cli: &Cli,
        jobs: usize,
        files: Vec<String>,
        checks: Vec<Check>,
        elapsed: Duration,
    ) -> Self {
        let config = serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null);
        let command = match &config {
            serde_json::Value::Object(m) => m.keys().next().cloned().unwrap_or_default(),
            serde_json::Value::String(s) => s.clone(),
            _ => String::new(),
        };
        RunManifest {
            tool: "ro-ac0".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            config,
            seed: cli.seed,
            files,
            pass: checks.iter().all(Check::pass),
            checks,
            runtime: Runtime {
                jobs,
                wall_time_s: elapsed.as_secs_f64(),
            },
        }
    }
}
