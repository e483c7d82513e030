//! CSV tables and the run manifest written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use polariton_core::{Error, Result};
use serde::Serialize;

/// A table with unit-annotated headers, e.g. `k [1/m]`.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        let header = columns.iter().map(|(name, unit)| format!("{name} [{unit}]")).collect();
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(csv_error)?;
        w.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// One CSV field. Floats use the shortest representation that round-trips.
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    Empty,
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            // Adding 0.0 folds -0 into 0.
            Cell::F(x) => write!(f, "{:e}", x + 0.0),
            Cell::U(n) => write!(f, "{n}"),
            Cell::S(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::F)
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub preset: Option<String>,
    pub config_path: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub version: &'static str,
    pub started: String,
    pub finished: String,
    /// The fully resolved scenario, so the run can be repeated without the original files.
    pub scenario_toml: Option<String>,
    pub outputs: Vec<PathBuf>,
}

pub fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Output directory plus the bookkeeping for its manifests.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<PathBuf> {
        let path = self.path(name);
        table.write(&path)?;
        log::info!("wrote {} ({} rows)", path.display(), table.len());
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, path: PathBuf) {
        self.written.push(path);
    }

    /// Writes `<file>.manifest.json` for every output of the run.
    pub fn finish(self, mut manifest: Manifest) -> Result<Vec<PathBuf>> {
        manifest.finished = timestamp(Utc::now());
        manifest.outputs = self.written.clone();
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        for path in &self.written {
            let mut name = path.file_name().unwrap_or_default().to_os_string();
            name.push(".manifest.json");
            fs::write(path.with_file_name(name), &text)?;
        }
        Ok(self.written)
    }
}
