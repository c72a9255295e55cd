//! Tabular writers and the run manifest.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(k) => k.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as u64)
    }
}

impl From<u64> for Cell {
    fn from(k: u64) -> Self {
        Cell::Int(k)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut out: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(out, "{}", line.join(","))?;
                }
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Output directory that remembers what was written to it.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write_with<F>(&mut self, name: &str, body: F) -> std::io::Result<PathBuf>
    where
        F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
    {
        let path = self.root.join(name);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn table(&mut self, stem: &str, table: &Table, format: Format) -> std::io::Result<PathBuf> {
        self.write_with(&format!("{stem}.{}", format.extension()), |w| table.write(w, format))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }
}

/// Hex SHA-256 of the canonical JSON form of a resolved configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub fn now_rfc3339() -> String {
    OffsetDateTime::now_utc()
        .format(&Rfc3339)
        .unwrap_or_else(|_| "unknown".to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Flag,
    Env,
    Config,
    Default,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_path: Option<String>,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub threads: usize,
    pub format: Format,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}
