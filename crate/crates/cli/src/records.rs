//! CSV tables with a fixed column order per subcommand, and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rkg_core::Rational;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::decimal;
use crate::error::{CliError, Result};

/// One CSV row under construction. Column order is insertion order.
#[derive(Debug, Default, Clone)]
pub struct Row {
    cells: Vec<(String, String)>,
}

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(mut self, name: &str, value: impl ToString) -> Self {
        self.cells.push((name.to_string(), value.to_string()));
        self
    }

    /// `<name>_num`, `<name>_den`, `<name>_dec`.
    pub fn exact(self, name: &str, value: &Rational) -> Self {
        self.text(&format!("{name}_num"), value.numer())
            .text(&format!("{name}_den"), value.denom())
            .text(&format!("{name}_dec"), decimal::render(value))
    }

    /// Exact triple, or three empty cells.
    pub fn exact_opt(self, name: &str, value: Option<&Rational>) -> Self {
        match value {
            Some(v) => self.exact(name, v),
            None => self
                .text(&format!("{name}_num"), "")
                .text(&format!("{name}_den"), "")
                .text(&format!("{name}_dec"), ""),
        }
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.cells
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    fn header(&self) -> Vec<&str> {
        self.cells.iter().map(|(k, _)| k.as_str()).collect()
    }
}

#[derive(Debug, Default, Clone)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        if let Some(first) = self.rows.first() {
            let header = first.header();
            w.write_record(&header)?;
            for row in &self.rows {
                assert_eq!(row.header(), header, "rows of one table share columns");
                w.write_record(row.cells.iter().map(|(_, v)| v))?;
            }
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
        Ok(())
    }
}

/// `f64` rendering used for estimates: shortest round-trip form.
pub fn float(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub tool: String,
    pub version: String,
    pub created_unix: u64,
    pub config: RunConfig,
    pub files: Vec<String>,
    /// Verdicts and notes, in emission order.
    pub summary: Vec<String>,
}

impl Manifest {
    pub fn new(config: &RunConfig, files: Vec<String>, summary: Vec<String>) -> Self {
        Self {
            run_id: config.run_id(),
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config: config.clone(),
            files,
            summary,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.to_path_buf())
}
