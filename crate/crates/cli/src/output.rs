//! Run directories: schema-tagged CSV tables, a long-format `summary.csv`
//! and `manifest.json` with the effective config, tolerances and checks.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, Tolerances};
use crate::error::CliError;

pub const MANIFEST_SCHEMA: &str = "brox.manifest.v1";
pub const SUMMARY_SCHEMA: &str = "brox.summary.v1";
pub const SUMMARY_COLUMNS: [&str; 6] = ["seed", "n", "m", "t", "metric", "value"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub schema: String,
    pub columns: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    command: &'a str,
    version: &'static str,
    seeds: Vec<u64>,
    config: &'a ExperimentConfig,
    tolerances: &'a Tolerances,
    checks: &'a [Check],
    outputs: &'a [OutputFile],
    passed: bool,
}

pub struct Run<'a> {
    dir: PathBuf,
    command: &'a str,
    config: &'a ExperimentConfig,
    tolerances: Tolerances,
    checks: Vec<Check>,
    outputs: Vec<OutputFile>,
    summary: Vec<[String; 6]>,
}

/// Shortest round-trip form: plain decimal in a readable range, exponent
/// notation outside it.
pub fn num(x: f64) -> String {
    // Drops the sign of negative zero.
    let x = if x == 0.0 { 0.0 } else { x };
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl<'a> Run<'a> {
    pub fn create(
        dir: &Path,
        command: &'a str,
        config: &'a ExperimentConfig,
        tolerances: Tolerances,
    ) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            config,
            tolerances,
            checks: Vec::new(),
            outputs: Vec::new(),
            summary: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn table(&mut self, file: &str, schema: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        write_csv(&self.dir.join(file), schema, columns, rows)?;
        self.record_output(file, schema, columns);
        Ok(())
    }

    pub fn record_output(&mut self, file: &str, schema: &str, columns: &[&str]) {
        self.outputs.push(OutputFile {
            file: file.into(),
            schema: schema.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
        });
    }

    fn push(&mut self, name: String, value: f64, relation: &'static str, limit: f64, passed: bool) {
        self.checks.push(Check {
            name,
            value,
            relation,
            limit,
            passed,
        });
    }

    pub fn check_le(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.push(name.into(), value, "<=", limit, value <= limit);
    }

    pub fn check_ge(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.push(name.into(), value, ">=", limit, value >= limit);
    }

    pub fn check_gt(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.push(name.into(), value, ">", limit, value > limit);
    }

    /// A yes/no property, stored as 1/0 against the limit 1.
    pub fn check_true(&mut self, name: impl Into<String>, ok: bool) {
        self.push(name.into(), if ok { 1.0 } else { 0.0 }, "==", 1.0, ok);
    }

    pub fn summary(&mut self, seed: u64, n: usize, t: Option<f64>, metric: &str, value: f64) {
        self.summary.push([
            seed.to_string(),
            n.to_string(),
            self.config.grid.m.to_string(),
            t.map(num).unwrap_or_default(),
            metric.into(),
            num(value),
        ]);
    }

    /// Writes `summary.csv` and `manifest.json`; returns the checks.
    pub fn finish(mut self) -> Result<Vec<Check>, CliError> {
        let rows: Vec<Vec<String>> = self.summary.iter().map(|r| r.to_vec()).collect();
        self.table("summary.csv", SUMMARY_SCHEMA, &SUMMARY_COLUMNS, &rows)?;
        let passed = self.checks.iter().all(|c| c.passed);
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA,
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            seeds: self.config.seeds(),
            config: self.config,
            tolerances: &self.tolerances,
            checks: &self.checks,
            outputs: &self.outputs,
            passed,
        };
        std::fs::write(
            self.dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)? + "\n",
        )?;
        Ok(self.checks)
    }
}

/// CSV with a leading `# schema: <id>` line.
pub fn write_csv(path: &Path, schema: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# schema: {schema}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
