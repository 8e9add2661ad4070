//! CSV tables with a one-line header. Floats use Rust's shortest
//! round-trip formatting (exponent form below 1e-5 and from 1e16 up), so
//! output is bit-stable and parses back to the same values.

use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

pub fn write_table(path: &Path, headers: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(headers).map_err(|e| CliError::csv(path, e))?;
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        w.write_record(row.iter().map(Cell::render))
            .map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// A CSV file read back as strings, with typed column access by name.
#[derive(Debug, Clone)]
pub struct Table {
    pub path: PathBuf,
    pub headers: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
        let headers = r
            .headers()
            .map_err(|e| CliError::csv(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let records = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::csv(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            headers,
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Errors with the first expected column that is missing or out of place.
    pub fn expect_headers(&self, expected: &[&str]) -> Result<(), CliError> {
        for (i, name) in expected.iter().enumerate() {
            if self.headers.get(i).map(String::as_str) != Some(*name) {
                return Err(self.mismatch(name));
            }
        }
        Ok(())
    }

    fn index(&self, name: &str) -> Result<usize, CliError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| self.mismatch(name))
    }

    fn mismatch(&self, column: &str) -> CliError {
        CliError::SchemaMismatch {
            path: self.path.clone(),
            column: column.to_string(),
        }
    }

    pub fn text_column(&self, name: &str) -> Result<Vec<&str>, CliError> {
        let i = self.index(name)?;
        Ok(self.records.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let i = self.index(name)?;
        self.records
            .iter()
            .map(|r| r[i].parse::<f64>().map_err(|_| self.mismatch(name)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let xs = [0.1, 1.0 / 3.0, -2.5e-17, f64::NAN, 1e300];
        let rows: Vec<Vec<Cell>> = xs
            .iter()
            .map(|&x| vec![Cell::from("a,b"), Cell::from(x)])
            .collect();
        write_table(&path, &["label", "x"], &rows).unwrap();
        let t = Table::read(&path).unwrap();
        t.expect_headers(&["label", "x"]).unwrap();
        assert_eq!(t.text_column("label").unwrap()[0], "a,b");
        let back = t.column("x").unwrap();
        for (a, b) in xs.iter().zip(&back) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_table(&path, &["t", "D"], &[vec![0.0.into(), 1.0.into()]]).unwrap();
        let t = Table::read(&path).unwrap();
        match t.expect_headers(&["t", "delta"]) {
            Err(CliError::SchemaMismatch { column, .. }) => assert_eq!(column, "delta"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(t.column("h"), Err(CliError::SchemaMismatch { .. })));
    }
}
