//! Single-realization simulation: configuration, time grid, and the
//! sample -> assemble -> diagonalize -> propagate -> measure pipeline.

use serde::{Deserialize, Serialize};

use crate::disorder::{sample_realization, DisorderSpec};
use crate::error::{CoreError, Result};
use crate::hamiltonian::{assemble, CouplingSpec};
use crate::modes::{build_mode_set, Directionality, ModeTruncation, WireConfig};
use crate::observables::{
    bin_site_populations, infinite_time_photon_weights, molecular_population, photon_content,
    right_tail_mass, wavepacket_width, ModeWeights, WeightAccumulator,
};
use crate::spectrum::{diagonalize, expand, reconstruct};
use crate::wavepacket::{gaussian_initial_state, WavepacketSpec};

/// Uniform time grid `0, dt, 2 dt, ..., t_end` (fs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    /// Final time, fs (inclusive).
    pub t_end: f64,
    /// Step, fs.
    pub dt: f64,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(CoreError::config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) {
            return Err(CoreError::config(format!(
                "t_end must be at least one step ({} fs), got {}",
                self.dt, self.t_end
            )));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize + 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples()).map(|i| i as f64 * self.dt).collect()
    }
}

/// Requested site-resolved probability snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSpec {
    /// Snapshot times, fs; need not lie on the propagation grid.
    pub times: Vec<f64>,
    /// Number of consecutive molecules summed per bin.
    pub bin_size: usize,
}

impl SnapshotSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bin_size == 0 {
            return Err(CoreError::config("snapshot bin_size must be at least 1"));
        }
        for &t in &self.times {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(CoreError::config(format!("snapshot time must be >= 0, got {t}")));
            }
        }
        Ok(())
    }
}

/// Spatially binned molecular probability at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSnapshot {
    /// Snapshot time, fs.
    pub time: f64,
    pub bin_size: usize,
    /// Probability summed over consecutive bins of `bin_size` molecules.
    pub bin_populations: Vec<f64>,
    /// Probability on molecules beyond `x0 + sigma_x`.
    pub right_tail_mass: f64,
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub wire: WireConfig,
    pub disorder: DisorderSpec,
    pub coupling: CouplingSpec,
    pub wavepacket: WavepacketSpec,
    pub truncation: ModeTruncation,
    pub directionality: Directionality,
    pub time_grid: TimeGrid,
    pub snapshots: Option<SnapshotSpec>,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.wire.validate()?;
        self.disorder.validate()?;
        self.coupling.validate()?;
        self.wavepacket.validate()?;
        self.time_grid.validate()?;
        if let Some(s) = &self.snapshots {
            s.validate()?;
        }
        if let Some(c) = self.wavepacket.center {
            if c < 0.0 || c > self.wire.length() {
                return Err(CoreError::config(format!(
                    "wave packet center {c} nm lies outside the wire (0..{} nm)",
                    self.wire.length()
                )));
            }
        }
        // Mode-set constraints (odd counts, cutoff above the band bottom)
        // surface here before any heavy work.
        build_mode_set(&self.wire, self.truncation, self.directionality)?;
        Ok(())
    }

    /// Hamiltonian dimension implied by the configuration.
    pub fn dimension(&self) -> Result<usize> {
        let modes = build_mode_set(&self.wire, self.truncation, self.directionality)?;
        Ok(self.wire.n_molecules + modes.len())
    }
}

/// Observables extracted from one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Seed that generated this realization.
    pub seed: u64,
    /// Sample times, fs.
    pub times: Vec<f64>,
    /// Wave packet width d(t), units of the lattice spacing.
    pub widths: Vec<f64>,
    /// Molecular population P_mol(t).
    pub molecular_populations: Vec<f64>,
    /// Time-averaged photon content over the grid.
    pub mean_photon_content: f64,
    /// Max-normalized trajectory-averaged mode weights; absent when the
    /// coupling is zero and no photon weight ever accumulates.
    pub trajectory_weights: Option<ModeWeights>,
    /// Max-normalized infinite-time mode weights; absent in the same case.
    pub infinite_time_weights: Option<ModeWeights>,
    /// Site-resolved snapshots, in requested order.
    pub snapshots: Vec<SiteSnapshot>,
}

/// Runs one realization end to end.
pub fn run_trajectory(config: &SimulationConfig, seed: u64) -> Result<TrajectoryRecord> {
    config.validate()?;
    let realization = sample_realization(&config.wire, &config.disorder, seed)?;
    let modes = build_mode_set(&config.wire, config.truncation, config.directionality)?;
    let spectrum = {
        let h = assemble(&realization, &modes, &config.coupling)?;
        diagonalize(&h)?
    };
    let psi0 = gaussian_initial_state(&realization, modes.len(), &config.wavepacket, &config.wire)?;
    let coefficients = expand(&spectrum, &psi0)?;

    let x0 = config.wavepacket.resolved_center(&config.wire);
    let tail_threshold = x0 + config.wavepacket.sigma_x;
    let times = config.time_grid.times();
    let mut widths = Vec::with_capacity(times.len());
    let mut populations = Vec::with_capacity(times.len());
    let mut photon_sum = 0.0;
    let mut accumulator = WeightAccumulator::new(modes.len());
    for &t in &times {
        let psi = reconstruct(&spectrum, &coefficients, t)?;
        widths.push(wavepacket_width(&psi, &realization, x0, config.wire.spacing)?);
        populations.push(molecular_population(&psi));
        photon_sum += photon_content(&psi);
        accumulator.add_state(&psi)?;
    }
    let mean_photon_content = photon_sum / times.len() as f64;

    let coupled = config.coupling.rabi_splitting > 0.0;
    let trajectory_weights = if coupled { Some(accumulator.finalize()?) } else { None };
    let infinite_time_weights = if coupled {
        Some(infinite_time_photon_weights(&spectrum, &psi0, &modes)?)
    } else {
        None
    };

    let mut snapshots = Vec::new();
    if let Some(spec) = &config.snapshots {
        for &t in &spec.times {
            let psi = reconstruct(&spectrum, &coefficients, t)?;
            snapshots.push(SiteSnapshot {
                time: t,
                bin_size: spec.bin_size,
                bin_populations: bin_site_populations(&psi, spec.bin_size)?,
                right_tail_mass: right_tail_mass(&psi, &realization, tail_threshold),
            });
        }
    }

    Ok(TrajectoryRecord {
        seed,
        times,
        widths,
        molecular_populations: populations,
        mean_photon_content,
        trajectory_weights,
        infinite_time_weights,
        snapshots,
    })
}
