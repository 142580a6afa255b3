//! CSV and sidecar-metadata writing.

use std::io;
use std::path::{Path, PathBuf};

/// A result table: header plus stringly-typed rows, written as RFC-4180
/// CSV with '.' decimals and no locale dependence.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest-round-trip float rendering; empty string for NaN, used for
/// flagged cells.
pub fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn write_csv(path: &Path, table: &Table) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()
}

/// Path of the sidecar metadata file for an output path.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

pub fn write_meta(out: &Path, meta: &serde_json::Value) -> io::Result<()> {
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(meta_path(out), text + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_and_paths() {
        assert_eq!(cell(1.5), "1.5");
        assert_eq!(cell(f64::NAN), "");
        assert_eq!(cell(5e-7), "0.0000005");
        assert_eq!(
            meta_path(Path::new("/tmp/x/run.csv")),
            PathBuf::from("/tmp/x/run.csv.meta.json")
        );
    }
}
