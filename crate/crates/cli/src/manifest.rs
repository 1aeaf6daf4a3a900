//! Run manifest: provenance and integrity record for every output file.
//!
//! The manifest is written atomically as the final step of a successful
//! run; a run that fails after producing any file leaves a failure marker
//! instead, so a directory without a valid manifest is never mistaken for a
//! complete result.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use polariton_core::disorder::RNG_ALGORITHM;
use polariton_core::io::atomic_write;
use serde::{Deserialize, Serialize};

use crate::config::{combined_config_hash, sha256_hex};
use crate::error::{AppError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FAILED_MARKER_FILE: &str = "manifest.failed.json";

/// Provenance of one labeled run member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberManifest {
    pub label: String,
    /// Fully resolved configuration, exactly as hashed.
    pub config_toml: String,
    pub config_hash: String,
    /// Largest retained mode energy, eV.
    pub realized_cutoff_ev: f64,
    /// Hamiltonian dimension (molecules + modes).
    pub dimension: usize,
    pub wall_time_s: f64,
    /// Relative path -> SHA-256 of every file the member produced.
    pub files: BTreeMap<String, String>,
}

/// Top-level record for one driver invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub code_version: String,
    pub rng_algorithm: String,
    /// Worker threads actually used.
    pub parallelism: usize,
    pub wall_time_s: f64,
    /// Hash over every member's label and canonical config.
    pub config_hash: String,
    pub members: Vec<MemberManifest>,
    /// Extra files produced by sweep post-processing.
    pub aggregate_files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(parallelism: usize, members: Vec<MemberManifest>) -> Self {
        let configs: BTreeMap<String, String> = members
            .iter()
            .map(|m| (m.label.clone(), m.config_toml.clone()))
            .collect();
        RunManifest {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            parallelism,
            wall_time_s: 0.0,
            config_hash: combined_config_hash(&configs),
            members,
            aggregate_files: BTreeMap::new(),
        }
    }

    /// Recomputes the config hash from the stored member configs; must
    /// reproduce `config_hash` for an untampered manifest.
    pub fn recompute_config_hash(&self) -> String {
        let configs: BTreeMap<String, String> = self
            .members
            .iter()
            .map(|m| (m.label.clone(), m.config_toml.clone()))
            .collect();
        combined_config_hash(&configs)
    }
}

/// Marker left behind when a run fails after producing files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedMarker {
    pub error: String,
    /// Files that had been written before the failure.
    pub files_written: Vec<String>,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| AppError::Io(e.to_string()))?;
    bytes.push(b'\n');
    atomic_write(path, &bytes).map_err(AppError::from)
}

pub fn write_manifest(manifest: &RunManifest, out_dir: &Path) -> Result<PathBuf> {
    let path = out_dir.join(MANIFEST_FILE);
    write_json(manifest, &path)?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| AppError::Io(e.to_string()))
}

/// Writes the failure marker and removes any stale manifest, so partial
/// output is never certified.
pub fn write_failed_marker(out_dir: &Path, error: &str, files_written: Vec<String>) {
    let marker = FailedMarker { error: error.to_string(), files_written };
    let stale = out_dir.join(MANIFEST_FILE);
    if stale.exists() {
        let _ = std::fs::remove_file(&stale);
    }
    if let Err(e) = write_json(&marker, &out_dir.join(FAILED_MARKER_FILE)) {
        eprintln!("also failed to write the failure marker: {e}");
    }
}

/// Hashes a produced file for the manifest.
pub fn checksum_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(sha256_hex(&bytes))
}
