//! Report and CSV writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

/// Numeric CSV table; values are written in shortest round-trip exponent form.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Internal(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(io)?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Files produced by one action, written once it succeeds.
#[derive(Debug, Default)]
pub struct Artifacts {
    tables: Vec<(String, Table)>,
}

impl Artifacts {
    pub fn table(&mut self, name: &str, t: Table) {
        self.tables.push((name.to_string(), t));
    }

    pub fn write(&self, dir: &Path, report: &Value) -> Result<Vec<PathBuf>, CliError> {
        create_dir(dir)?;
        let mut written = vec![write_json(&dir.join("report.json"), report)?];
        for (name, t) in &self.tables {
            let path = dir.join(name);
            t.write(&path)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}
