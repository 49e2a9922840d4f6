//! CSV tables and the run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

/// Schema version shared by every table the tool writes.
pub const SCHEMA_VERSION: u32 = 1;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Opt(Option<f64>),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Opt(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits in scientific notation; independent of locale.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_cell(out: &mut String, cell: &Cell) {
    match cell {
        Cell::Num(v) => out.push_str(&format_f64(*v)),
        Cell::Opt(Some(v)) => out.push_str(&format_f64(*v)),
        Cell::Opt(None) => {}
        Cell::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Cell::Bool(b) => out.push(if *b { '1' } else { '0' }),
        Cell::Text(s) => {
            if s.contains([',', '"', '\n']) {
                out.push('"');
                out.push_str(&s.replace('"', "\"\""));
                out.push('"');
            } else {
                out.push_str(s);
            }
        }
    }
}

/// In-memory CSV table with a schema header line.
#[derive(Debug, Clone)]
pub struct Table {
    name: String,
    columns: Vec<&'static str>,
    body: String,
    rows: usize,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Table { name: name.to_string(), columns: columns.to_vec(), body: String::new(), rows: 0 }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            write_cell(&mut self.body, cell);
        }
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn render(&self) -> String {
        let mut s = format!("# schema: plasmon.{}/v{SCHEMA_VERSION}\n", self.name);
        s.push_str(&self.columns.join(","));
        s.push('\n');
        s.push_str(&self.body);
        s
    }
}

/// Path and SHA-256 digest of a file read or written by the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: impl Into<String>, bytes: &[u8]) -> Self {
        let hash = Sha256::digest(bytes);
        let mut hex = String::with_capacity(64);
        for b in hash {
            let _ = write!(hex, "{b:02x}");
        }
        FileDigest { path: path.into(), sha256: hex, bytes: bytes.len() as u64 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitSystem {
    pub energy: &'static str,
    pub length: &'static str,
    pub time: &'static str,
    pub hbar_ev_fs: f64,
    pub e_squared_ev_nm: f64,
    pub phonon_line_ev: f64,
    pub mass_unit_kg: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        use plasmon_core::units::*;
        UnitSystem {
            energy: "eV",
            length: "nm",
            time: "fs",
            hbar_ev_fs: HBAR,
            e_squared_ev_nm: E_SQUARED,
            phonon_line_ev: PHONON_LINE,
            mass_unit_kg: MASS_UNIT_KG,
        }
    }
}

/// Self-describing record written once per run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub arguments: Vec<String>,
    pub config: crate::config::RunConfig,
    pub units: UnitSystem,
    pub sigma3_kind: String,
    pub sigma3_provenance: String,
    pub containment: String,
    pub pulse_convention: &'static str,
    pub threads: usize,
    pub rng_consulted: bool,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub counters: BTreeMap<String, u64>,
    pub notes: Vec<String>,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
}

/// Pulse and containment conventions, recorded verbatim in every manifest.
pub const PULSE_CONVENTION: &str = "psi(k) proportional to exp(-(k-k0)^2 sigma^2 / 2) with sigma = W / bandwidth; \
     P_p = [erf((dL + L/2) / (2 sigma)) - erf((dL - L/2) / (2 sigma))] / 2 (symmetric) or the literal single-erf form";

pub const MANIFEST_NAME: &str = "manifest.json";

/// Collects outputs and writes them after all computation is done.
#[derive(Debug)]
pub struct OutputSet {
    directory: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new(directory: impl Into<PathBuf>) -> Self {
        OutputSet { directory: directory.into(), files: Vec::new() }
    }

    pub fn directory(&self) -> &Path {
        &self.directory
    }

    pub fn add_table(&mut self, file: &str, table: &Table) {
        self.files.push((file.to_string(), table.render().into_bytes()));
    }

    /// Writes every file and returns their digests.
    pub fn write(&self) -> io::Result<Vec<FileDigest>> {
        std::fs::create_dir_all(&self.directory)?;
        let mut digests = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            std::fs::write(self.directory.join(name), bytes)?;
            digests.push(FileDigest::of(name.clone(), bytes));
        }
        Ok(digests)
    }

    pub fn write_manifest(&self, manifest: &RunManifest) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::create_dir_all(&self.directory)?;
        std::fs::write(self.directory.join(MANIFEST_NAME), text)
    }
}
