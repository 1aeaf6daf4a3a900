//! Wire geometry, cavity mode grids, and the photon dispersion.
//!
//! The wire is a cuboid cavity of cross section `l_y` x `l_z` filled with a
//! dielectric of constant `epsilon`. Photons occupy the lowest transverse
//! branch and a ladder of longitudinal modes `q = 2 pi m_x / L_x` with
//! `L_x = n_molecules * spacing`.

use serde::{Deserialize, Serialize};

use crate::constants::HBAR_C_EV_NM;
use crate::error::{CoreError, Result};

/// Geometry and material parameters of the molecular wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireConfig {
    /// Number of molecular sites N_M.
    pub n_molecules: usize,
    /// Mean intermolecular spacing a, nm.
    pub spacing: f64,
    /// Transverse cavity dimensions, nm.
    pub l_y: f64,
    pub l_z: f64,
    /// Relative dielectric constant of the intracavity medium.
    pub epsilon: f64,
    /// Mean exciton energy hbar omega_M, eV.
    pub mean_exciton_energy: f64,
}

impl WireConfig {
    /// Wire length L_x = N_M * a, nm.
    pub fn length(&self) -> f64 {
        self.n_molecules as f64 * self.spacing
    }

    /// Longitudinal mode spacing 2 pi / L_x, 1/nm.
    pub fn mode_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_molecules == 0 {
            return Err(CoreError::config("n_molecules must be at least 1"));
        }
        for (name, v) in [
            ("spacing", self.spacing),
            ("l_y", self.l_y),
            ("l_z", self.l_z),
            ("mean_exciton_energy", self.mean_exciton_energy),
        ] {
            if !(v > 0.0) {
                return Err(CoreError::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.epsilon >= 1.0) {
            return Err(CoreError::config(format!(
                "epsilon must be at least 1, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Which longitudinal momenta are retained in the photon basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directionality {
    /// m_x in {0, +-1, ..., +-m_max}; the physical mode set.
    Bidirectional,
    /// m_x in {0, 1, ..., m_max}; effective model without left movers.
    NonnegativeOnly,
}

/// How the mode ladder is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModeTruncation {
    /// Keep exactly this many modes (odd for bidirectional sets).
    Count(usize),
    /// Keep every mode with energy at or below this cutoff, eV.
    CutoffEnergy(f64),
}

/// One retained cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityMode {
    /// Longitudinal index m_x.
    pub m_x: i64,
    /// Longitudinal wavevector q = 2 pi m_x / L_x, 1/nm.
    pub q: f64,
    /// Mode energy hbar omega_q, eV.
    pub energy: f64,
}

/// The retained photon basis, sorted by ascending m_x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityModeSet {
    pub modes: Vec<CavityMode>,
    /// Transverse wavevector q_0, 1/nm.
    pub q0: f64,
    pub directionality: Directionality,
    /// Mode spacing 2 pi / L_x, 1/nm.
    pub q_spacing: f64,
}

impl CavityModeSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest retained mode energy, eV.
    pub fn realized_cutoff(&self) -> f64 {
        self.modes.iter().map(|m| m.energy).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Energy of the q = 0 mode, eV.
    pub fn min_energy(&self) -> f64 {
        self.modes.iter().map(|m| m.energy).fold(f64::INFINITY, f64::min)
    }
}

/// Transverse wavevector q_0 = pi sqrt(1/l_y^2 + 1/l_z^2) of the lowest
/// photonic branch, 1/nm.
pub fn transverse_wavevector(l_y: f64, l_z: f64) -> Result<f64> {
    if !(l_y > 0.0) || !(l_z > 0.0) {
        return Err(CoreError::config(format!(
            "transverse dimensions must be positive, got l_y={l_y}, l_z={l_z}"
        )));
    }
    Ok(std::f64::consts::PI * (1.0 / (l_y * l_y) + 1.0 / (l_z * l_z)).sqrt())
}

/// Photon dispersion hbar omega_q = (hbar c / sqrt(epsilon)) sqrt(q0^2 + q^2), eV.
pub fn mode_energy(q: f64, q0: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon >= 1.0) {
        return Err(CoreError::config(format!("epsilon must be at least 1, got {epsilon}")));
    }
    if !(q0 > 0.0) {
        return Err(CoreError::config(format!("q0 must be positive, got {q0}")));
    }
    Ok(HBAR_C_EV_NM / epsilon.sqrt() * (q0 * q0 + q * q).sqrt())
}

/// Builds the retained photon basis for a wire.
///
/// Count truncation keeps `2 m_max + 1` (bidirectional, count must be odd) or
/// `m_max + 1` (nonnegative-only) modes. Cutoff truncation keeps every mode
/// with energy at or below the cutoff; the realized cutoff reported by the
/// returned set is the largest retained energy.
pub fn build_mode_set(
    wire: &WireConfig,
    truncation: ModeTruncation,
    directionality: Directionality,
) -> Result<CavityModeSet> {
    wire.validate()?;
    let q0 = transverse_wavevector(wire.l_y, wire.l_z)?;
    let dq = wire.mode_spacing();

    let m_max: i64 = match truncation {
        ModeTruncation::Count(0) => {
            return Err(CoreError::config("mode count must be at least 1"));
        }
        ModeTruncation::Count(n) => match directionality {
            Directionality::Bidirectional => {
                if n % 2 == 0 {
                    return Err(CoreError::config(format!(
                        "bidirectional mode count must be odd (m_x = 0, +-1, ..., +-m_max), got {n}"
                    )));
                }
                ((n - 1) / 2) as i64
            }
            Directionality::NonnegativeOnly => (n - 1) as i64,
        },
        ModeTruncation::CutoffEnergy(cutoff) => {
            let min_energy = mode_energy(0.0, q0, wire.epsilon)?;
            if cutoff < min_energy {
                return Err(CoreError::config(format!(
                    "cutoff {cutoff} eV is below the minimum mode energy {min_energy:.6} eV"
                )));
            }
            let mut m = 0i64;
            while mode_energy((m + 1) as f64 * dq, q0, wire.epsilon)? <= cutoff {
                m += 1;
            }
            m
        }
    };

    let lo = match directionality {
        Directionality::Bidirectional => -m_max,
        Directionality::NonnegativeOnly => 0,
    };
    let modes = (lo..=m_max)
        .map(|m_x| {
            let q = m_x as f64 * dq;
            Ok(CavityMode { m_x, q, energy: mode_energy(q, q0, wire.epsilon)? })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CavityModeSet { modes, q0, directionality, q_spacing: dq })
}

/// Longitudinal wavevector of the photon with the given energy, 1/nm.
///
/// Inverts the dispersion; errors if the energy lies below the branch bottom.
pub fn wavevector_at_energy(energy: f64, q0: f64, epsilon: f64) -> Result<f64> {
    let min = mode_energy(0.0, q0, epsilon)?;
    if energy < min {
        return Err(CoreError::config(format!(
            "energy {energy} eV is below the minimum mode energy {min:.6} eV"
        )));
    }
    let k = energy * epsilon.sqrt() / HBAR_C_EV_NM;
    Ok((k * k - q0 * q0).sqrt())
}
