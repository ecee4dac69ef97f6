use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use num_rational::BigRational;
use serde_json::{json, Value};

use gpfree_core::rational::{decimal_ceil, decimal_floor, fraction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub format: Format,
    pub destination: Option<PathBuf>,
    pub precision: usize,
}

impl OutputSpec {
    pub fn new(format: Format, destination: Option<PathBuf>, precision: usize) -> Result<Self> {
        if precision == 0 {
            bail!("--precision must be at least 1");
        }
        Ok(OutputSpec {
            format,
            destination,
            precision,
        })
    }

    pub fn emit(&self, doc: &Doc) -> Result<()> {
        let text = match self.format {
            Format::Table => doc.to_table(),
            Format::Csv => doc.to_csv()?,
            Format::Json => serde_json::to_string_pretty(&doc.json)? + "\n",
        };
        match &self.destination {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }

    /// Rational as `p/q` with a decimal rendering rounded toward −∞.
    pub fn lower(&self, x: &BigRational) -> String {
        format!("{} ({})", fraction(x), decimal_floor(x, self.precision))
    }

    pub fn upper(&self, x: &BigRational) -> String {
        format!("{} ({})", fraction(x), decimal_ceil(x, self.precision))
    }

    pub fn rational_json(&self, x: &BigRational) -> Value {
        json!({
            "exact": fraction(x),
            "decimal_floor": decimal_floor(x, self.precision),
            "decimal_ceil": decimal_ceil(x, self.precision),
        })
    }
}

/// A command's result in a format-neutral shape: free-form notes for the
/// human table, a rectangular body shared by table and CSV, and a JSON value.
#[derive(Debug, Default)]
pub struct Doc {
    pub notes: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

impl Doc {
    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn columns(&mut self, names: &[&str]) {
        self.header = names.iter().map(|s| s.to_string()).collect();
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let key_width = self
            .notes
            .iter()
            .map(|(k, _)| k.chars().count())
            .max()
            .unwrap_or(0);
        for (k, v) in &self.notes {
            out.push_str(&format!("{k:<key_width$}  {v}\n"));
        }
        if self.header.is_empty() {
            return out;
        }
        if !self.notes.is_empty() {
            out.push('\n');
        }
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let last = cells.len().saturating_sub(1);
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if i == last {
                    s.push_str(cell);
                } else {
                    s.push_str(&format!("{cell:<w$}  "));
                }
            }
            s.push('\n');
            s
        };
        out.push_str(&line(&self.header));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.header.is_empty() {
            w.write_record(["key", "value"])?;
            for (k, v) in &self.notes {
                w.write_record([k, v])?;
            }
        } else {
            w.write_record(&self.header)?;
            for row in &self.rows {
                w.write_record(row)?;
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

pub fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}
