//! Static disorder sampling for molecular energies and positions.
//!
//! Site energies are drawn from Normal(hbar omega_M, sigma_m^2) and positions
//! from Normal((n-1) a, sigma_a^2), in that order, from a ChaCha12 stream
//! seeded per realization. Positions are not wrapped back into [0, L_x); the
//! coupling phases and the initial envelope consume them as sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::modes::WireConfig;

/// Identifier of the full random stream recorded in run manifests.
pub const RNG_ALGORITHM: &str = "splitmix64-derive/chacha12/normal-ziggurat";

/// Disorder strengths. Both may be zero (ordered system).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    /// Standard deviation of the exciton energies, eV.
    pub sigma_m: f64,
    /// Standard deviation of the site positions, nm.
    pub sigma_a: f64,
}

impl DisorderSpec {
    pub const NONE: DisorderSpec = DisorderSpec { sigma_m: 0.0, sigma_a: 0.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_m >= 0.0) || !(self.sigma_a >= 0.0) {
            return Err(CoreError::config(format!(
                "disorder strengths must be nonnegative, got sigma_m={}, sigma_a={}",
                self.sigma_m, self.sigma_a
            )));
        }
        Ok(())
    }
}

/// One sampled configuration of the molecular chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolecularRealization {
    /// Site excitation energies E_n > 0, eV.
    pub energies: Vec<f64>,
    /// Site positions x_n, nm.
    pub positions: Vec<f64>,
    /// Seed this realization was drawn from.
    pub seed: u64,
}

impl MolecularRealization {
    pub fn n_molecules(&self) -> usize {
        self.energies.len()
    }
}

/// Derives the seed of realization `index` from an ensemble master seed.
///
/// This is the `index`-th output of the SplitMix64 generator initialized with
/// `master`, evaluated in closed form. Outputs for a fixed master are distinct
/// for distinct indices because every step of the construction is a bijection
/// on u64.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws of a nonpositive site energy are rejected and redrawn; give up after
/// this many consecutive rejections on one site.
const MAX_REDRAWS: usize = 10_000;

/// Samples one disorder realization for a wire.
///
/// Deterministic: equal `(wire, disorder, seed)` inputs give bitwise equal
/// results on every platform.
pub fn sample_realization(
    wire: &WireConfig,
    disorder: &DisorderSpec,
    seed: u64,
) -> Result<MolecularRealization> {
    wire.validate()?;
    disorder.validate()?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let energy_dist = Normal::new(wire.mean_exciton_energy, disorder.sigma_m)
        .map_err(|e| CoreError::config(format!("invalid energy distribution: {e}")))?;
    let position_dist = Normal::new(0.0, disorder.sigma_a)
        .map_err(|e| CoreError::config(format!("invalid position distribution: {e}")))?;

    let n = wire.n_molecules;
    let mut energies = Vec::with_capacity(n);
    for site in 0..n {
        let mut redraws = 0;
        let e = loop {
            let e: f64 = rng.sample(energy_dist);
            if e > 0.0 {
                break e;
            }
            redraws += 1;
            if redraws > MAX_REDRAWS {
                return Err(CoreError::numerical(format!(
                    "site {site}: exceeded {MAX_REDRAWS} redraws of a nonpositive energy \
                     (mean {} eV, sigma_m {} eV)",
                    wire.mean_exciton_energy, disorder.sigma_m
                )));
            }
        };
        energies.push(e);
    }

    let positions = (0..n)
        .map(|site| site as f64 * wire.spacing + rng.sample(position_dist))
        .collect();

    Ok(MolecularRealization { energies, positions, seed })
}
