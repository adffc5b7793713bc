// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Comma-separated numeric tables with a one-line header.

use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new() -> Self {
        Table {
            headers: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        self.headers.push(name.to_string());
        self.columns.push(values);
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers.iter().position(|h| h == name).map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Full double precision: 17 significant digits.
    pub fn write(&self, path: &Path) -> Result<()> {
        let n = self.rows();
        if self.columns.iter().any(|c| c.len() != n) {
            return Err(CliError::io(path, "ragged table"));
        }
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
        w.write_record(&self.headers).map_err(|e| CliError::io(path, e))?;
        for i in 0..n {
            w.write_record(self.columns.iter().map(|c| format!("{:.16e}", c[i])))
                .map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| CliError::io(path, e))?;
        let headers: Vec<String> = r
            .headers()
            .map_err(|e| CliError::io(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut columns = vec![Vec::new(); headers.len()];
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| CliError::io(path, e))?;
            for (c, field) in rec.iter().enumerate() {
                let x: f64 = field
                    .parse()
                    .map_err(|_| CliError::io(path, format!("row {}: '{field}' is not a number", line + 2)))?;
                columns[c].push(x);
            }
        }
        Ok(Table { headers, columns })
    }
}

impl Default for Table {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let mut t = Table::new();
        t.push("tau_ns", vec![0.0, 1.0 / 3.0, 1e-300]);
        t.push("g2", vec![std::f64::consts::PI, -0.0, 12345.678901234567]);
        t.write(&p).unwrap();
        assert_eq!(Table::read(&p).unwrap(), t);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("tau_ns,g2\n"));
    }
}
