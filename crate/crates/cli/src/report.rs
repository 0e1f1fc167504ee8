//! Result tables, verdicts and their CSV/JSON serialization.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Experiment;

/// Columns appended to every row so a single row can be reproduced alone.
pub const PROVENANCE_COLUMNS: [&str; 3] = ["master_seed", "replicates", "version"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn int(v: usize) -> Self {
        Cell::Int(v as i64)
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    /// CSV rendering; floats use the shortest representation that round-trips.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub verdicts: Vec<Verdict>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().chain(PROVENANCE_COLUMNS.iter()).map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    /// Appends a row followed by its provenance cells.
    pub fn push(&mut self, mut cells: Vec<Cell>, seed: u64, replicates: &str) {
        cells.push(Cell::Text(seed.to_string()));
        cells.push(Cell::text(replicates));
        cells.push(Cell::text(anderson_clt::VERSION));
        assert_eq!(cells.len(), self.columns.len(), "row width must match the header");
        self.rows.push(cells);
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// Everything written by one run.
pub struct RunReport {
    pub table: Table,
    pub wall_time_seconds: f64,
    pub workers: usize,
}

impl RunReport {
    /// JSON sidecar: the CSV content with config echo, verdicts and provenance.
    pub fn sidecar(&self, e: &Experiment, csv_name: &str) -> Value {
        let t = &self.table;
        json!({
            "kind": e.kind,
            "config": e.config,
            "columns": t.columns,
            "rows": t.rows.iter().map(|r| r.iter().map(Cell::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "verdicts": t.verdicts,
            "all_passed": t.all_passed(),
            "provenance": {
                "csv": csv_name,
                "master_seed": e.config.master_seed,
                "versions": {
                    "anderson-clt": anderson_clt::VERSION,
                    "anderson-clt-cli": env!("CARGO_PKG_VERSION"),
                },
            },
            "execution": {
                "wall_time_seconds": self.wall_time_seconds,
                "workers": self.workers,
            },
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json` under `dir`.
    pub fn write(&self, e: &Experiment, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        let stem = e.config.output.clone().unwrap_or_else(|| e.kind.name().to_string());
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        if let Some(parent) = csv_path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let csv = self.table.to_csv().map_err(std::io::Error::other)?;
        std::fs::write(&csv_path, csv)?;
        let name = csv_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut text = serde_json::to_string_pretty(&self.sidecar(e, &name)).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(&json_path, text)?;
        Ok((csv_path, json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering() {
        let mut t = Table::new(&["a", "b", "c", "d"]);
        t.push(vec![Cell::int(3), Cell::Num(0.1), Cell::Empty, Cell::text("x,y")], 42, "0..10");
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("a,b,c,d,master_seed,replicates,version"));
        assert_eq!(lines.next(), Some(format!("3,0.1,,\"x,y\",42,0..10,{}", anderson_clt::VERSION).as_str()));
    }

    #[test]
    fn verdicts_aggregate() {
        let mut t = Table::new(&[]);
        assert!(t.all_passed());
        t.verdict(Verdict::new("a", true, ""));
        t.verdict(Verdict::new("b", false, ""));
        assert!(!t.all_passed());
    }
}
