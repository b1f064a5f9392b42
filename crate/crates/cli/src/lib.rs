//! Config-driven runner for the magframe verification experiments.
//!
//! [`run`] executes one experiment, writes `report.json` and one CSV per table
//! into the output directory, and returns the report. Each asserted invariant
//! becomes a [`Check`]; the process exit code is 0 iff all checks pass.

pub mod config;
mod experiments;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub use config::{parse_config, parse_config_str, ConfigError, Experiment, ExperimentConfig};

/// Environment variable bounding the worker count.
pub const THREADS_ENV: &str = "MAGFRAME_THREADS";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Core(#[from] magframe::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }
}

/// One asserted invariant `value <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Acceptance criterion this check belongs to, if any.
    pub criterion: Option<u32>,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, criterion: Option<u32>, value: f64, tolerance: f64) -> Self {
        // NaN never passes.
        let pass = value <= tolerance;
        Self { name: name.into(), criterion, value, tolerance, pass }
    }

    /// The one-line PASS/FAIL summary printed by the runner.
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        let crit = self.criterion.map(|c| format!("[criterion {c}] ")).unwrap_or_default();
        let rel = if self.pass { "<=" } else { ">" };
        format!("{tag} {crit}{}: {:e} {rel} {:e}", self.name, self.value, self.tolerance)
    }
}

/// A CSV table with an explicit header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub passed: bool,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub tables: Vec<String>,
    pub summary: serde_json::Value,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Results of one experiment before they are written out.
pub(crate) struct Outcome {
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub summary: serde_json::Value,
}

/// Runs the configured experiment and writes its outputs into `config.out`.
pub fn run(config: &ExperimentConfig) -> Result<Report, RunError> {
    config.validate()?;
    let outcome = experiments::run(config)?;
    let out = &config.out;
    std::fs::create_dir_all(out).map_err(|source| RunError::Io { path: out.clone(), source })?;
    for t in &outcome.tables {
        write_file(&out.join(t.file_name()), |w| t.write(w))?;
    }
    let report = Report {
        experiment: config.experiment,
        passed: outcome.checks.iter().all(|c| c.pass),
        config: config.clone(),
        checks: outcome.checks,
        tables: outcome.tables.iter().map(Table::file_name).collect(),
        summary: outcome.summary,
    };
    write_file(&out.join("report.json"), |mut w| {
        serde_json::to_writer_pretty(&mut w, &report).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    Ok(report)
}

fn write_file(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>) -> Result<(), RunError> {
    let err = |source| RunError::Io { path: path.to_path_buf(), source };
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(err)?);
    f(&mut w).map_err(err)?;
    w.flush().map_err(err)
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn threads_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::Invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}
