//! Initial exciton wave packet preparation.
//!
//! The excitation starts purely molecular: a Gaussian envelope over the
//! sites with an optional carrier momentum, and exactly zero photon
//! amplitude. The envelope `exp(-(x - x0)^2 / (4 sigma_x^2))` puts the
//! standard deviation of the site probability distribution at `sigma_x`, so
//! the initial width observable in units of the lattice spacing is
//! `sigma_x / a`.

use serde::{Deserialize, Serialize};

use crate::disorder::MolecularRealization;
use crate::error::{CoreError, Result};
use crate::modes::WireConfig;
use crate::spectrum::StateVector;
use crate::C64;

/// Shape of the initial molecular wave packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSpec {
    /// Real-space standard deviation sigma_x of the site probability
    /// distribution, nm.
    pub sigma_x: f64,
    /// Carrier wavevector q0_bar imprinted as exp(i q0_bar x_n), nm^-1.
    pub mean_momentum: f64,
    /// Packet center, nm. Defaults to the wire midpoint.
    pub center: Option<f64>,
}

impl WavepacketSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_x > 0.0) {
            return Err(CoreError::config(format!(
                "sigma_x must be positive, got {}",
                self.sigma_x
            )));
        }
        if !self.mean_momentum.is_finite() {
            return Err(CoreError::config(format!(
                "mean_momentum must be finite, got {}",
                self.mean_momentum
            )));
        }
        if let Some(c) = self.center {
            if !c.is_finite() {
                return Err(CoreError::config(format!("center must be finite, got {c}")));
            }
        }
        Ok(())
    }

    /// Packet center for a given wire, nm.
    pub fn resolved_center(&self, wire: &WireConfig) -> f64 {
        self.center.unwrap_or_else(|| 0.5 * wire.length())
    }
}

/// Builds the normalized initial state for one molecular realization.
///
/// Site amplitudes follow the envelope at the realized (possibly disordered)
/// positions; all `n_modes` photon amplitudes are exactly zero. Errors if
/// the envelope underflows to zero on every site.
pub fn gaussian_initial_state(
    realization: &MolecularRealization,
    n_modes: usize,
    spec: &WavepacketSpec,
    wire: &WireConfig,
) -> Result<StateVector> {
    spec.validate()?;
    let n_mol = realization.n_molecules();
    if n_mol == 0 {
        return Err(CoreError::config("realization holds no molecules"));
    }
    if spec.sigma_x < wire.spacing {
        log::warn!(
            "sigma_x = {} nm is below the lattice spacing {} nm; the packet is \
             not resolved by the site grid",
            spec.sigma_x,
            wire.spacing
        );
    }
    let x0 = spec.resolved_center(wire);

    let mut amplitudes = ndarray::Array1::<C64>::zeros(n_mol + n_modes);
    let mut total = 0.0f64;
    for (site, &x) in realization.positions.iter().enumerate() {
        let u = x - x0;
        let envelope = (-u * u / (4.0 * spec.sigma_x * spec.sigma_x)).exp();
        total += envelope * envelope;
        amplitudes[site] = C64::from_polar(envelope, spec.mean_momentum * x);
    }
    if total <= 0.0 {
        return Err(CoreError::config(format!(
            "wave packet envelope vanishes on every site (center {x0} nm, sigma_x {} nm)",
            spec.sigma_x
        )));
    }
    let scale = 1.0 / total.sqrt();
    for site in 0..n_mol {
        amplitudes[site] *= scale;
    }
    Ok(StateVector { amplitudes, n_molecules: n_mol })
}
