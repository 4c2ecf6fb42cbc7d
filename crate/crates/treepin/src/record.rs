//! Persisted run records and CSV formatting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub schema_version: u32,
    /// RFC 3339 UTC time at which the record was written.
    pub timestamp: String,
    pub command: String,
    /// Fully resolved configuration, master seed included.
    pub config: RunConfig,
    pub results: serde_json::Value,
    pub tool_version: String,
}

impl RunRecord {
    pub fn new(command: &str, config: RunConfig, results: serde_json::Value) -> Self {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            command: command.to_owned(),
            config,
            results,
            tool_version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).into(),
        }
    }
}

/// Float with 17 significant digits; `inf`, `-inf` and `nan` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// In-memory CSV table written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    text: String,
}

impl Table {
    pub fn new(name: &'static str, header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Table { name, text }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(c.as_ref());
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

/// Output of one command before it is written.
#[derive(Debug)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub results: serde_json::Value,
    /// Human-readable summary printed to stdout.
    pub summary: String,
    /// Failed checks; non-empty means exit code 1.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn new(results: serde_json::Value) -> Self {
        Outcome {
            tables: Vec::new(),
            results,
            summary: String::new(),
            failures: Vec::new(),
        }
    }

    pub fn say(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.summary, "{}", line.as_ref());
    }
}

/// Writes the tables (or, for JSON output, the results) and the run record.
/// Returns the paths written.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    json: bool,
    config: RunConfig,
    outcome: &Outcome,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut put = |name: String, body: &str| -> Result<(), CliError> {
        let path = dir.join(name);
        std::fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    if json {
        let body = serde_json::to_string_pretty(&outcome.results).expect("results serialize");
        put(format!("{command}.json"), &body)?;
    } else {
        for t in &outcome.tables {
            put(t.file_name(), t.as_str())?;
        }
    }
    let record = RunRecord::new(command, config, outcome.results.clone());
    let body = serde_json::to_string_pretty(&record).expect("record serializes");
    put(format!("{command}.record.json"), &body)?;
    Ok(written)
}
