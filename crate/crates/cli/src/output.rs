//! CSV tables and their JSON manifests, both written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use motive_core::constants::Constants;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// 17 significant digits, enough to round-trip an f64.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Replaces `path` with `bytes` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::Io(e.to_string()))?;
    tmp.write_all(bytes).map_err(|e| CliError::Io(e.to_string()))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[derive(Debug, Serialize)]
pub struct Conventions {
    pub time_dependence: &'static str,
    pub geometry: &'static str,
    pub force_sign: &'static str,
    pub heat_sign: &'static str,
    pub material_frequencies: &'static str,
    pub frequency_window: String,
}

pub fn conventions() -> Conventions {
    Conventions {
        time_dependence: "exp(-i omega t)",
        geometry: "plate 1 fills z < 0, plate 2 fills z > d; the magnetic field is along x",
        force_sign: "F_y > 0 pushes plate 2 towards +y",
        heat_sign: "H > 0 is absorbed by plate 2",
        material_frequencies: "photon energies in eV",
        frequency_window: format!(
            "hbar omega from {} eV to {} k_B max(T1, T2)",
            motive_core::observables::OMEGA_MIN_EV,
            motive_core::observables::PLANCK_CUTOFF
        ),
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, S: Serialize> {
    pub command: &'a str,
    pub version: &'static str,
    pub git_revision: Option<&'static str>,
    pub output: String,
    pub output_sha256: String,
    pub rows: usize,
    pub failed_rows: usize,
    pub converged: Vec<bool>,
    pub config: &'a RunConfig,
    pub flags: &'a [String],
    pub constants: &'a Constants,
    pub conventions: Conventions,
    pub workers: usize,
    pub wall_time_s: f64,
    pub timestamp_unix_s: f64,
    pub summary: S,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn timestamp() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Writes the CSV and then its manifest next to it.
pub fn emit<'a, S: Serialize>(
    out: &Path,
    csv: &[u8],
    manifest: impl FnOnce(String) -> Manifest<'a, S>,
) -> Result<(), CliError> {
    write_atomic(out, csv)?;
    let m = manifest(sha256_hex(csv));
    let json = serde_json::to_vec_pretty(&m).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&manifest_path(out), &json)
}
