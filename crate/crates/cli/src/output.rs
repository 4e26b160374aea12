//! File writers. Numbers in CSV files use scientific notation with 17
//! significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// `{:.16e}`, with the sign of zero and non-finite values kept readable.
pub fn number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV table assembled in memory and written in one go.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            columns: header.len(),
            text,
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        self.row_with(values, &[]);
    }

    /// Numeric cells followed by literal text cells.
    pub fn row_with(&mut self, values: &[f64], text: &[&str]) {
        assert_eq!(values.len() + text.len(), self.columns, "row width");
        let mut first = true;
        for v in values {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(&number(*v));
        }
        for t in text {
            if !first {
                self.text.push(',');
            }
            first = false;
            write!(self.text, "{t}").unwrap();
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Output directory that records every file it writes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, csv: &Csv) -> Result<()> {
        self.write(name, csv.as_str())
    }

    pub fn write_toml(&mut self, name: &str, table: &toml::Table) -> Result<()> {
        self.write(name, &toml::to_string(table).expect("table serializes"))
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}

/// Small builder for summary tables.
#[derive(Debug, Default, Clone)]
pub struct Table(pub toml::Table);

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<toml::Value>) -> &mut Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, value)
    }

    pub fn floats(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let arr: Vec<toml::Value> = values.iter().map(|&v| v.into()).collect();
        self.set(key, arr)
    }

    pub fn sub(&mut self, key: &str, table: Table) -> &mut Self {
        self.set(key, toml::Value::Table(table.0))
    }

    pub fn into_inner(self) -> toml::Table {
        self.0
    }
}
