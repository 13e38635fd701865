//! CSV and JSON files written by the commands.
//!
//! Probability tables use one tidy schema,
//! `source,metric,threshold,value,method,ci_halfwidth`, with 1-based
//! sources, `metric` in {AoI, PAoI} and `method` in {closed, general, sim}.
//! The half-width is empty for analytic rows.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TidyRow {
    pub source: usize,
    pub metric: String,
    pub threshold: f64,
    pub value: f64,
    pub method: String,
    pub ci_halfwidth: Option<f64>,
}

/// Analytic value against a simulated estimate at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub source: usize,
    pub metric: String,
    pub threshold: f64,
    pub analytic: f64,
    pub empirical: f64,
    pub standard_error: f64,
    pub z: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub service: String,
    pub source: usize,
    pub method: String,
    pub mean_aoi: f64,
    pub var_aoi: f64,
    pub mean_paoi: f64,
    pub var_paoi: f64,
}

/// One point of a single-source rate sweep at a fixed budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweepRow {
    pub metric: String,
    pub thresholds: String,
    pub source: usize,
    pub rate: f64,
    pub objective: f64,
    pub argmax: usize,
    pub probabilities: String,
}

/// Optimal or equal allocation at one total budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetSweepRow {
    pub metric: String,
    pub thresholds: String,
    pub total_rate: f64,
    pub allocation: String,
    pub objective: f64,
    pub rates: String,
}

/// Joins a vector with `;` so it fits in one CSV field.
pub fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

pub fn split(field: &str) -> Result<Vec<f64>> {
    field
        .split(';')
        .map(|s| s.parse::<f64>().map_err(|e| CliError::Schema(format!("bad list field {field:?}: {e}"))))
        .collect()
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .map(|row| row.map_err(|e| CliError::Schema(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Tracks the files a command writes into its output directory.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.root.join(name)
    }

    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        let p = self.path(name);
        write_csv(&p, rows)
    }

    pub fn json<V: Serialize>(&mut self, name: &str, value: &V) -> Result<()> {
        let p = self.path(name);
        write_json(&p, value)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }

    pub fn files(&self) -> Vec<String> {
        let mut f = self.files.clone();
        f.sort();
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tidy_rows_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let rows = vec![
            TidyRow {
                source: 1,
                metric: "AoI".into(),
                threshold: 8.0,
                value: 0.1 + 0.2,
                method: "closed".into(),
                ci_halfwidth: None,
            },
            TidyRow {
                source: 2,
                metric: "PAoI".into(),
                threshold: 0.5,
                value: 1e-300,
                method: "sim".into(),
                ci_halfwidth: Some(3.25e-4),
            },
        ];
        write_csv(&p, &rows).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("source,metric,threshold,value,method,ci_halfwidth\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_csv::<TidyRow>(&p).unwrap(), rows);
    }

    #[test]
    fn list_fields_round_trip() {
        let v = vec![0.1, 2.0 / 3.0, 5e-9];
        assert_eq!(split(&join(&v)).unwrap(), v);
        assert!(split("1;x").is_err());
    }
}
