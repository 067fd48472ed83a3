//! CSV export.
//!
//! Every file starts with a schema line `#schema <name> v<version>`, then a
//! header row. Floats use the shortest decimal text that parses back to the
//! same binary value; absent optional values are empty cells.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};

pub const NORM_SERIES_COLUMNS: &[&str] = &["m", "t", "phi_norm", "fmc_norm_g", "fp_iterations"];

pub const CERTIFICATE_COLUMNS: &[&str] = &[
    "m",
    "d_h",
    "d_h_max",
    "d_g",
    "d_g_max",
    "d_g_rate",
    "d_h1",
    "d_h1_delta3",
    "c1",
    "c1_over_delta2",
    "c2",
    "c2_over_delta",
    "c3",
    "max_ratio",
    "contracting",
    "fp_iterations",
    "phi_envelope",
];

pub const SCHEMA_VERSION: u32 = 1;

pub fn float(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

/// A CSV table in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &'static [&'static str]) -> Self {
        Self { name, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#schema {} v{SCHEMA_VERSION}", self.name);
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&path, self.render()).map_err(CliError::io(path))
    }
}

/// Splits rendered CSV text back into schema line, header and rows.
pub fn parse(text: &str) -> Option<(String, Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines();
    let schema = lines.next()?.strip_prefix("#schema ")?.to_string();
    let header = lines.next()?.split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    Some((schema, header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, -0.0, 1.0, 1e-300, 6.883216142639262, 1.0 / 3.0, f64::MAX, 5e-324] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(float(1e-3), "0.001");
        assert_eq!(opt_float(None), "");
    }

    #[test]
    fn schema_line_comes_first() {
        let mut t = Table::new("norm_series", NORM_SERIES_COLUMNS);
        t.push(vec!["0".into(), float(0.0), float(1e-3), float(0.0), "0".into()]);
        let text = t.render();
        assert!(text.starts_with("#schema norm_series v1\nm,t,phi_norm,fmc_norm_g,fp_iterations\n"));
        let (schema, header, rows) = parse(&text).unwrap();
        assert_eq!(schema, "norm_series v1");
        assert_eq!(header.len(), 5);
        assert_eq!(rows[0][2], "0.001");
    }

    #[test]
    #[should_panic]
    fn ragged_rows_are_a_bug() {
        Table::new("x", NORM_SERIES_COLUMNS).push(vec!["1".into()]);
    }
}
