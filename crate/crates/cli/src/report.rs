//! Report documents and CSV data series.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::error::CliError;

/// One verdict: `value` compared with `limit` under `relation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: String,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value, "<=", limit, value <= limit)
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value, ">=", limit, value >= limit)
    }

    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value, "<", limit, value < limit)
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value, ">", limit, value > limit)
    }

    /// Boolean property, recorded as 1 or 0.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, "==", 1.0, ok)
    }

    fn new(name: &str, value: f64, relation: &str, limit: f64, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            value,
            relation: relation.to_string(),
            limit,
            passed: passed && !value.is_nan(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(experiment: &str, seed: u64, checks: Vec<Check>, tables: Vec<Table>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            seed,
            passed: checks.iter().all(|c| c.passed),
            checks,
            tables,
        }
    }

    /// Writes `<experiment>.json` and, if asked, one `<experiment>_<table>.csv`
    /// per table. Returns the written paths.
    pub fn write(&self, dir: &Path, csv: bool) -> Result<Vec<PathBuf>, CliError> {
        let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut out = Vec::new();
        let json = dir.join(format!("{}.json", self.experiment));
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
        std::fs::write(&json, text + "\n").map_err(io)?;
        out.push(json);
        if csv {
            for t in &self.tables {
                let path = dir.join(format!("{}_{}.csv", self.experiment, t.name));
                let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Output(e.to_string()))?;
                w.write_record(&t.columns).map_err(|e| CliError::Output(e.to_string()))?;
                for row in &t.rows {
                    w.write_record(row.iter().map(|v| format!("{v:e}")))
                        .map_err(|e| CliError::Output(e.to_string()))?;
                }
                w.flush().map_err(io)?;
                out.push(path);
            }
        }
        Ok(out)
    }
}
