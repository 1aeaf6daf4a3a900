//! Run configuration: TOML schema, defaults, validation, and overrides.
//!
//! Every physical default describes the same baseline wire: 10 nm spacing,
//! a 200 x 400 nm cross section with epsilon = 3, 2.0 eV excitons resonant
//! with the lowest cavity mode, a 0.1 eV Rabi splitting, and a 60 nm
//! Gaussian packet at rest. Validation collects every violation in one
//! pass instead of stopping at the first.

use std::collections::BTreeMap;
use std::path::Path;

use polariton_core::disorder::DisorderSpec;
use polariton_core::hamiltonian::CouplingSpec;
use polariton_core::modes::{
    mode_energy, transverse_wavevector, Directionality, ModeTruncation, WireConfig,
};
use polariton_core::simulation::{SimulationConfig, SnapshotSpec, TimeGrid};
use polariton_core::wavepacket::WavepacketSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WireSection {
    pub n_molecules: usize,
    pub spacing_nm: f64,
    pub l_y_nm: f64,
    pub l_z_nm: f64,
    pub epsilon: f64,
    pub exciton_energy_ev: f64,
}

impl Default for WireSection {
    fn default() -> Self {
        WireSection {
            n_molecules: 500,
            spacing_nm: 10.0,
            l_y_nm: 200.0,
            l_z_nm: 400.0,
            epsilon: 3.0,
            exciton_energy_ev: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSection {
    pub sigma_m_ev: f64,
    pub sigma_a_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingSection {
    pub rabi_splitting_ev: f64,
}

impl Default for CouplingSection {
    fn default() -> Self {
        CouplingSection { rabi_splitting_ev: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WavepacketSection {
    pub sigma_x_nm: f64,
    pub mean_momentum_inv_nm: f64,
    /// Launch center; defaults to the middle of the wire when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_nm: Option<f64>,
}

impl Default for WavepacketSection {
    fn default() -> Self {
        WavepacketSection { sigma_x_nm: 60.0, mean_momentum_inv_nm: 0.0, center_nm: None }
    }
}

/// Default retained mode count when the section sets neither `count` nor
/// `cutoff_ev`.
pub const DEFAULT_MODE_COUNT: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    /// Keep exactly this many modes. Mutually exclusive with `cutoff_ev`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Keep every mode at or below this energy. Mutually exclusive with
    /// `count`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff_ev: Option<f64>,
    pub directionality: Directionality,
}

impl Default for ModesSection {
    fn default() -> Self {
        ModesSection { count: None, cutoff_ev: None, directionality: Directionality::Bidirectional }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_end_fs: f64,
    pub dt_fs: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { t_end_fs: 5000.0, dt_fs: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub realizations: usize,
    pub master_seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection { realizations: 1, master_seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnapshotsSection {
    pub times_fs: Vec<f64>,
    pub bin_size: usize,
}

impl Default for SnapshotsSection {
    fn default() -> Self {
        SnapshotsSection { times_fs: Vec::new(), bin_size: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: "runs".to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsSection {
    /// Largest Hamiltonian dimension (molecules + modes) the driver will
    /// attempt; larger requests are refused with a sizing hint.
    pub max_dimension: usize,
}

impl Default for LimitsSection {
    fn default() -> Self {
        LimitsSection { max_dimension: 8192 }
    }
}

/// One complete run request, as read from a TOML file or built by a preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub wire: WireSection,
    pub disorder: DisorderSection,
    pub coupling: CouplingSection,
    pub wavepacket: WavepacketSection,
    pub modes: ModesSection,
    pub time: TimeSection,
    pub ensemble: EnsembleSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<SnapshotsSection>,
    pub output: OutputSection,
    pub limits: LimitsSection,
}

impl RunConfig {
    /// Resolved mode truncation; `count` and `cutoff_ev` are exclusive and
    /// default to [`DEFAULT_MODE_COUNT`] modes when neither is set.
    pub fn truncation(&self) -> ModeTruncation {
        match (self.modes.count, self.modes.cutoff_ev) {
            (_, Some(cutoff)) if self.modes.count.is_none() => {
                ModeTruncation::CutoffEnergy(cutoff)
            }
            (Some(n), _) => ModeTruncation::Count(n),
            _ => ModeTruncation::Count(DEFAULT_MODE_COUNT),
        }
    }

    pub fn wire(&self) -> WireConfig {
        WireConfig {
            n_molecules: self.wire.n_molecules,
            spacing: self.wire.spacing_nm,
            l_y: self.wire.l_y_nm,
            l_z: self.wire.l_z_nm,
            epsilon: self.wire.epsilon,
            mean_exciton_energy: self.wire.exciton_energy_ev,
        }
    }

    pub fn to_simulation(&self) -> SimulationConfig {
        SimulationConfig {
            wire: self.wire(),
            disorder: DisorderSpec {
                sigma_m: self.disorder.sigma_m_ev,
                sigma_a: self.disorder.sigma_a_nm,
            },
            coupling: CouplingSpec { rabi_splitting: self.coupling.rabi_splitting_ev },
            wavepacket: WavepacketSpec {
                sigma_x: self.wavepacket.sigma_x_nm,
                mean_momentum: self.wavepacket.mean_momentum_inv_nm,
                center: self.wavepacket.center_nm,
            },
            truncation: self.truncation(),
            directionality: self.modes.directionality,
            time_grid: TimeGrid { t_end: self.time.t_end_fs, dt: self.time.dt_fs },
            snapshots: self.snapshots.as_ref().filter(|s| !s.times_fs.is_empty()).map(|s| {
                SnapshotSpec { times: s.times_fs.clone(), bin_size: s.bin_size }
            }),
        }
    }

    /// Every constraint violation in the configuration, in declaration
    /// order. Empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let w = &self.wire;
        if w.n_molecules == 0 {
            errs.push("wire.n_molecules must be at least 1".to_string());
        }
        for (key, v) in [
            ("wire.spacing_nm", w.spacing_nm),
            ("wire.l_y_nm", w.l_y_nm),
            ("wire.l_z_nm", w.l_z_nm),
            ("wire.exciton_energy_ev", w.exciton_energy_ev),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                errs.push(format!("{key} must be positive, got {v}"));
            }
        }
        if !(w.epsilon >= 1.0) || !w.epsilon.is_finite() {
            errs.push(format!("wire.epsilon must be at least 1, got {}", w.epsilon));
        }
        for (key, v) in [
            ("disorder.sigma_m_ev", self.disorder.sigma_m_ev),
            ("disorder.sigma_a_nm", self.disorder.sigma_a_nm),
            ("coupling.rabi_splitting_ev", self.coupling.rabi_splitting_ev),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                errs.push(format!("{key} must be finite and nonnegative, got {v}"));
            }
        }
        if !(self.wavepacket.sigma_x_nm > 0.0) || !self.wavepacket.sigma_x_nm.is_finite() {
            errs.push(format!(
                "wavepacket.sigma_x_nm must be positive, got {}",
                self.wavepacket.sigma_x_nm
            ));
        }
        if !self.wavepacket.mean_momentum_inv_nm.is_finite() {
            errs.push(format!(
                "wavepacket.mean_momentum_inv_nm must be finite, got {}",
                self.wavepacket.mean_momentum_inv_nm
            ));
        }
        let wire_geometry_ok = w.n_molecules > 0
            && w.spacing_nm > 0.0
            && w.l_y_nm > 0.0
            && w.l_z_nm > 0.0
            && w.epsilon >= 1.0
            && [w.spacing_nm, w.l_y_nm, w.l_z_nm, w.epsilon].iter().all(|v| v.is_finite());
        if let Some(c) = self.wavepacket.center_nm {
            let length = self.wire().length();
            if wire_geometry_ok && !(0.0..=length).contains(&c) {
                errs.push(format!(
                    "wavepacket.center_nm {c} lies outside the wire (0..{length} nm)"
                ));
            }
        }
        match (self.modes.count, self.modes.cutoff_ev) {
            (Some(_), Some(_)) => {
                errs.push(
                    "modes.count and modes.cutoff_ev are mutually exclusive; set exactly one"
                        .to_string(),
                );
            }
            (Some(0), None) => errs.push("modes.count must be at least 1".to_string()),
            (Some(n), None) => {
                if self.modes.directionality == Directionality::Bidirectional && n % 2 == 0 {
                    errs.push(format!(
                        "bidirectional mode count must be odd (m_x = 0, +-1, ..., +-m_max), got {n}"
                    ));
                }
            }
            (None, Some(cutoff)) => {
                if !cutoff.is_finite() {
                    errs.push(format!("modes.cutoff_ev must be finite, got {cutoff}"));
                } else if wire_geometry_ok {
                    if let Ok(q0) = transverse_wavevector(w.l_y_nm, w.l_z_nm) {
                        if let Ok(min_energy) = mode_energy(0.0, q0, w.epsilon) {
                            if cutoff < min_energy {
                                errs.push(format!(
                                    "modes.cutoff_ev {cutoff} is below the minimum mode energy {min_energy:.6} eV"
                                ));
                            }
                        }
                    }
                }
            }
            (None, None) => {}
        }
        if !(self.time.dt_fs > 0.0) || !self.time.dt_fs.is_finite() {
            errs.push(format!("time.dt_fs must be positive, got {}", self.time.dt_fs));
        } else if !(self.time.t_end_fs >= self.time.dt_fs) {
            errs.push(format!(
                "time.t_end_fs must be at least one step ({} fs), got {}",
                self.time.dt_fs, self.time.t_end_fs
            ));
        }
        if self.ensemble.realizations == 0 {
            errs.push("ensemble.realizations must be at least 1".to_string());
        }
        if let Some(s) = &self.snapshots {
            if s.bin_size == 0 {
                errs.push("snapshots.bin_size must be at least 1".to_string());
            }
            for &t in &s.times_fs {
                if !(t >= 0.0) || !t.is_finite() {
                    errs.push(format!(
                        "snapshots.times_fs entries must be finite and nonnegative, got {t}"
                    ));
                }
            }
        }
        if self.output.directory.is_empty() {
            errs.push("output.directory must not be empty".to_string());
        }
        if self.limits.max_dimension == 0 {
            errs.push("limits.max_dimension must be at least 1".to_string());
        }
        errs
    }

    /// Errors with every violation listed, or passes.
    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(AppError::Config(format!(
                "{} violation(s):\n  - {}",
                errs.len(),
                errs.join("\n  - ")
            )))
        }
    }

    /// Canonical serialized form used for hashing and the manifest.
    pub fn canonical_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| AppError::Io(format!("serializing config: {e}")))
    }

    /// Round-trips through the TOML table form, e.g. to apply overrides.
    pub fn to_table(&self) -> Result<toml::Table> {
        let text = self.canonical_toml()?;
        text.parse::<toml::Table>()
            .map_err(|e| AppError::Io(format!("re-parsing canonical config: {e}")))
    }
}

/// Parses TOML text into a table, keeping parse errors in the config class.
pub fn table_from_str(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| AppError::Config(format!("invalid TOML: {e}")))
}

/// Reads and parses a config file.
pub fn table_from_file(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    table_from_str(&text)
}

/// Deserializes a table into a [`RunConfig`]; unknown keys are errors.
pub fn config_from_table(table: toml::Table) -> Result<RunConfig> {
    toml::Table::try_into(table).map_err(|e| AppError::Config(e.to_string()))
}

/// Applies one `section.key=value` override to a config table. The value is
/// parsed as a TOML literal (number, bool, array, quoted string); a bare
/// word falls back to a string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw_value) = spec
        .split_once('=')
        .ok_or_else(|| AppError::Config(format!("override '{spec}' is not of the form key=value")))?;
    let path = path.trim();
    let raw_value = raw_value.trim();
    if path.is_empty() {
        return Err(AppError::Config(format!("override '{spec}' has an empty key")));
    }
    let value = parse_override_value(raw_value)
        .ok_or_else(|| AppError::Config(format!("override '{spec}' has an unparseable value")))?;

    let segments: Vec<&str> = path.split('.').collect();
    let mut current = table;
    for segment in &segments[..segments.len() - 1] {
        let entry = current
            .entry(segment.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry.as_table_mut().ok_or_else(|| {
            AppError::Config(format!("override '{spec}': '{segment}' is not a section"))
        })?;
    }
    current.insert(segments[segments.len() - 1].to_string(), value);
    Ok(())
}

fn parse_override_value(raw: &str) -> Option<toml::Value> {
    let tagged = format!("v = {raw}");
    if let Ok(table) = tagged.parse::<toml::Table>() {
        if let Some(v) = table.get("v") {
            return Some(v.clone());
        }
    }
    // Bare words (e.g. nonnegative-only) are not TOML literals; take them
    // as strings unless they contain quoting that failed above.
    if raw.contains('"') || raw.contains('\'') {
        return None;
    }
    Some(toml::Value::String(raw.to_string()))
}

/// SHA-256 hex digest, used for config hashes and file checksums.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Hash of a set of member configs, keyed by label, independent of member
/// order.
pub fn combined_config_hash(member_configs: &BTreeMap<String, String>) -> String {
    let mut hasher = Sha256::new();
    for (label, text) in member_configs {
        hasher.update(label.as_bytes());
        hasher.update([0u8]);
        hasher.update(text.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
