//! CSV tables and JSON run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::scenario::Scenario;

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 12 significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Column names fixed per subcommand, rows in grid order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// CSV bytes: provenance comment, header, rows, LF endings.
    pub fn to_csv(&self, comment: &str) -> Vec<u8> {
        let mut buf = Vec::new();
        writeln!(buf, "# {comment}").expect("write to memory");
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
            w.write_record(&self.header).expect("write to memory");
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::render)).expect("write to memory");
            }
            w.flush().expect("write to memory");
        }
        buf
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Result of one subcommand before it is written out.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub table: Table,
    /// Extra manifest entries (fits, optima).
    pub results: Value,
    pub warnings: Vec<String>,
}

/// Manifest identity: subcommand, resolved config and versions.
#[derive(Serialize)]
struct Identity<'a> {
    subcommand: &'a str,
    config: &'a Scenario,
    versions: Value,
}

fn versions() -> Value {
    json!({ "ramsey": env!("CARGO_PKG_VERSION"), "ramsey-core": ramsey_core::VERSION })
}

/// Manifest path for a data file: `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the CSV and the manifest beside it; returns the manifest JSON.
pub fn write_run(subcommand: &str, config: &Scenario, out: &Path, run: &RunOutput) -> std::io::Result<Value> {
    let identity = Identity { subcommand, config, versions: versions() };
    let id_hash = sha256_hex(serde_json::to_string(&identity).expect("serializable").as_bytes());
    let csv = run.table.to_csv(&format!("ramsey {subcommand} manifest-sha256={id_hash}"));
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(out, &csv)?;
    let manifest = json!({
        "subcommand": subcommand,
        "config": config,
        "seed": config.seed,
        "versions": versions(),
        "manifest_sha256": id_hash,
        "data": { "path": out.file_name().map(|n| n.to_string_lossy().into_owned()), "sha256": sha256_hex(&csv), "rows": run.table.rows.len() },
        "warnings": run.warnings,
        "results": run.results,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("serializable");
    text.push('\n');
    std::fs::write(manifest_path(out), text)?;
    Ok(manifest)
}
