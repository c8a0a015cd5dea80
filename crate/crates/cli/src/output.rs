//! Plain CSV tables with a leading comment line carrying the configuration.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // shortest round-trip representation, so output is reproducible bit for bit
            Cell::Real(x) if x.is_nan() => "nan".into(),
            Cell::Real(x) => format!("{x:e}"),
            Cell::Text(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV text: `# <comment>`, the column names, then one line per row.
    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = format!("# {comment}\n{}\n", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path, name: &str, comment: &str) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, self.to_csv(comment))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["m", "n", "lambda"]);
        t.push(vec![0usize.into(), (-1i32).into(), 0.125.into()]);
        t.push(vec![1usize.into(), 2i32.into(), f64::NAN.into()]);
        assert_eq!(t.to_csv("k=v"), "# k=v\nm,n,lambda\n0,-1,1.25e-1\n1,2,nan\n");
    }

    #[test]
    fn reals_roundtrip() {
        for x in [0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, -2.5e-300] {
            let s = Cell::Real(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
