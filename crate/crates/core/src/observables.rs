//! Transport and photonic observables over propagated states.
//!
//! Width and population observables read a single state; the photon-mode
//! weight observables either accumulate a trajectory average or evaluate the
//! infinite-time average directly from the eigendecomposition. All weight
//! distributions are reported relative to their maximum (max = 1).

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::disorder::MolecularRealization;
use crate::error::{CoreError, Result};
use crate::modes::CavityModeSet;
use crate::spectrum::{expand, Spectrum, StateVector};
use crate::wavepacket::WavepacketSpec;

/// Molecular population below which the conditional width observable is
/// undefined.
pub const WIDTH_POPULATION_FLOOR: f64 = 1e-12;

/// Eigenvalue spacing (eV) below which states are treated as one degenerate
/// cluster in infinite-time averages.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Relative tolerance for flagging ties in weight maxima.
pub const TIE_REL_TOL: f64 = 1e-9;

/// Wave packet width in units of the lattice spacing: the root mean square
/// displacement from the launch center `x0`, conditioned on the molecular
/// subspace.
///
/// `d = sqrt( (1/P_mol) * sum_n |c_n|^2 (x_n - x0)^2 ) / a`
///
/// Errors with an undefined-observable flag when the molecular population
/// falls below [`WIDTH_POPULATION_FLOOR`].
pub fn wavepacket_width(
    psi: &StateVector,
    realization: &MolecularRealization,
    x0: f64,
    spacing: f64,
) -> Result<f64> {
    if !(spacing > 0.0) {
        return Err(CoreError::config(format!("spacing must be positive, got {spacing}")));
    }
    if psi.n_molecules != realization.n_molecules() {
        return Err(CoreError::config(format!(
            "state has {} molecular amplitudes but realization has {} sites",
            psi.n_molecules,
            realization.n_molecules()
        )));
    }
    let mut p_mol = 0.0;
    let mut second_moment = 0.0;
    for (c, &x) in psi.molecular_amplitudes().iter().zip(&realization.positions) {
        let p = c.norm_sqr();
        p_mol += p;
        let u = x - x0;
        second_moment += p * u * u;
    }
    if p_mol < WIDTH_POPULATION_FLOOR {
        return Err(CoreError::UndefinedObservable(format!(
            "wave packet width undefined: molecular population {p_mol:.3e} below {WIDTH_POPULATION_FLOOR:.0e}"
        )));
    }
    Ok((second_moment / p_mol).sqrt() / spacing)
}

/// Total molecular population `P_mol = sum_n |c_n|^2`.
pub fn molecular_population(psi: &StateVector) -> f64 {
    psi.molecular_amplitudes().iter().map(|c| c.norm_sqr()).sum()
}

/// Total photonic population `sum_q |c_q|^2`.
pub fn photon_content(psi: &StateVector) -> f64 {
    psi.photon_amplitudes().iter().map(|c| c.norm_sqr()).sum()
}

/// Relative photon-mode weight distribution, normalized to max = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeWeights {
    /// Weights in mode-set order, max exactly 1.
    pub weights: Array1<f64>,
    /// First index attaining the maximum, in mode order.
    pub max_index: usize,
    /// All indices whose weight ties the maximum within [`TIE_REL_TOL`].
    pub tie_indices: Vec<usize>,
}

fn normalize_weights(raw: Array1<f64>, what: &str) -> Result<ModeWeights> {
    let mut max = 0.0f64;
    let mut max_index = 0usize;
    for (j, &w) in raw.iter().enumerate() {
        if w > max {
            max = w;
            max_index = j;
        }
    }
    if max <= 0.0 {
        return Err(CoreError::numerical(format!(
            "degenerate normalization: all {what} photon weights are zero"
        )));
    }
    let weights = raw.mapv(|w| w / max);
    let tie_indices = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w >= 1.0 - TIE_REL_TOL)
        .map(|(j, _)| j)
        .collect();
    Ok(ModeWeights { weights, max_index, tie_indices })
}

/// Accumulates `sum_t |<q|psi(t)>|^2` over a trajectory, one state at a time,
/// without retaining the states.
#[derive(Debug, Clone)]
pub struct WeightAccumulator {
    sums: Array1<f64>,
    n_states: usize,
}

impl WeightAccumulator {
    pub fn new(n_modes: usize) -> Self {
        Self { sums: Array1::zeros(n_modes), n_states: 0 }
    }

    pub fn add_state(&mut self, psi: &StateVector) -> Result<()> {
        if psi.n_modes() != self.sums.len() {
            return Err(CoreError::config(format!(
                "state has {} photon modes, accumulator expects {}",
                psi.n_modes(),
                self.sums.len()
            )));
        }
        for (s, c) in self.sums.iter_mut().zip(psi.photon_amplitudes().iter()) {
            *s += c.norm_sqr();
        }
        self.n_states += 1;
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Finalizes the max-normalized distribution. Errors when fewer than two
    /// states were accumulated or every weight is zero.
    pub fn finalize(self) -> Result<ModeWeights> {
        if self.n_states < 2 {
            return Err(CoreError::config(format!(
                "trajectory weight average needs at least 2 states, got {}",
                self.n_states
            )));
        }
        normalize_weights(self.sums, "trajectory-averaged")
    }
}

/// Time-averaged relative mode weights over an explicit series of states.
pub fn photon_weight_trajectory(states: &[StateVector], modes: &CavityModeSet) -> Result<ModeWeights> {
    let mut acc = WeightAccumulator::new(modes.len());
    for psi in states {
        acc.add_state(psi)?;
    }
    acc.finalize()
}

/// Infinite-time average of the photon-mode weights from the
/// eigendecomposition, normalized to max = 1.
///
/// Eigenvalues closer than [`DEGENERACY_TOL`] form one cluster whose joint
/// contribution is `|<q| P_cluster |psi0>|^2`; summing per state inside a
/// degenerate cluster would keep basis-dependent cross terms that do not
/// average out.
pub fn infinite_time_photon_weights(
    spectrum: &Spectrum,
    psi0: &StateVector,
    modes: &CavityModeSet,
) -> Result<ModeWeights> {
    let n_modes = modes.len();
    if spectrum.dim() != spectrum.n_molecules + n_modes {
        return Err(CoreError::config(format!(
            "spectrum dimension {} does not match {} molecules + {} modes",
            spectrum.dim(),
            spectrum.n_molecules,
            n_modes
        )));
    }
    let coefficients = expand(spectrum, psi0)?;
    let n_mol = spectrum.n_molecules;
    let dim = spectrum.dim();

    let mut raw = Array1::<f64>::zeros(n_modes);
    let mut cluster_amp = vec![crate::C64::new(0.0, 0.0); n_modes];
    let mut start = 0usize;
    while start < dim {
        let mut end = start + 1;
        while end < dim && spectrum.eigenvalues[end] - spectrum.eigenvalues[end - 1] < DEGENERACY_TOL {
            end += 1;
        }
        for amp in cluster_amp.iter_mut() {
            *amp = crate::C64::new(0.0, 0.0);
        }
        for k in start..end {
            let c = coefficients[k];
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let column = spectrum.eigenvectors.column(k);
            for (j, amp) in cluster_amp.iter_mut().enumerate() {
                *amp += column[n_mol + j] * c;
            }
        }
        for (w, amp) in raw.iter_mut().zip(cluster_amp.iter()) {
            *w += amp.norm_sqr();
        }
        start = end;
    }
    normalize_weights(raw, "infinite-time")
}

/// Molecular (excitonic) fraction of the lower polariton branch at a given
/// photon energy: `1/2 (1 + delta / sqrt(delta^2 + omega_r^2))` with
/// `delta = mode_energy - e_m`.
pub fn hopfield_molecular_fraction(mode_energy: f64, e_m: f64, omega_r: f64) -> Result<f64> {
    if !(omega_r > 0.0) {
        return Err(CoreError::config(format!("omega_r must be positive, got {omega_r}")));
    }
    let delta = mode_energy - e_m;
    Ok(0.5 * (1.0 + delta / (delta * delta + omega_r * omega_r).sqrt()))
}

/// Closed-form estimate of the infinite-time weight distribution for the
/// ordered system: `Pi_q (1 - Pi_q) exp(-sigma_x^2 (q - q0_bar)^2)` per mode,
/// normalized to max = 1. Valid for comparisons of peak location only; the
/// exact distribution comes from [`infinite_time_photon_weights`].
pub fn analytic_photon_weights(
    modes: &CavityModeSet,
    wavepacket: &WavepacketSpec,
    e_m: f64,
    omega_r: f64,
) -> Result<ModeWeights> {
    wavepacket.validate()?;
    let mut raw = Array1::<f64>::zeros(modes.len());
    for (w, mode) in raw.iter_mut().zip(&modes.modes) {
        let pi = hopfield_molecular_fraction(mode.energy, e_m, omega_r)?;
        let dq = mode.q - wavepacket.mean_momentum;
        *w = pi * (1.0 - pi) * (-wavepacket.sigma_x * wavepacket.sigma_x * dq * dq).exp();
    }
    normalize_weights(raw, "analytic")
}

/// Time-averaged relative deviation of a width trajectory from a reference:
/// `(1/N) sum_i |d_i - r_i| / r_i`.
pub fn truncation_error(d: &[f64], d_ref: &[f64]) -> Result<f64> {
    if d.len() != d_ref.len() {
        return Err(CoreError::config(format!(
            "time grids differ: {} vs {} samples",
            d.len(),
            d_ref.len()
        )));
    }
    if d.is_empty() {
        return Err(CoreError::config("cannot compare empty trajectories"));
    }
    let mut total = 0.0;
    for (&di, &ri) in d.iter().zip(d_ref) {
        if !(ri > 0.0) {
            return Err(CoreError::config(format!("reference width must be positive, got {ri}")));
        }
        total += (di - ri).abs() / ri;
    }
    Ok(total / d.len() as f64)
}

/// First-order propagation of per-point uncertainties through
/// [`truncation_error`], treating time points as independent.
///
/// Returns `(error, uncertainty)`. The propagation is linear, so the result
/// scales with the supplied std arrays; feed doubled standard deviations to
/// obtain 2-sigma bars.
pub fn propagate_error_uncertainty(
    d_mean: &[f64],
    d_std: &[f64],
    d_ref_mean: &[f64],
    d_ref_std: &[f64],
) -> Result<(f64, f64)> {
    let n = d_mean.len();
    if d_std.len() != n || d_ref_mean.len() != n || d_ref_std.len() != n {
        return Err(CoreError::config(format!(
            "mismatched series lengths: {} / {} / {} / {}",
            n,
            d_std.len(),
            d_ref_mean.len(),
            d_ref_std.len()
        )));
    }
    let error = truncation_error(d_mean, d_ref_mean)?;
    let mut variance = 0.0;
    for i in 0..n {
        let r = d_ref_mean[i];
        let e_i = (d_mean[i] - r).abs() / r;
        let sign = if d_mean[i] >= r { 1.0 } else { -1.0 };
        // de/dd = s/r, de/dr = -(s + e)/r with s the sign of (d - r).
        let dd = d_std[i] / r;
        let dr = (sign + e_i) * d_ref_std[i] / r;
        variance += dd * dd + dr * dr;
    }
    let uncertainty = variance.sqrt() / n as f64;
    Ok((error, uncertainty))
}

/// Dominant oscillation period of a real signal, fs.
///
/// Locates the magnitude peak of the discrete Fourier transform over
/// harmonics `k >= 2` (excluding the slow whole-window trend) and refines it
/// by parabolic interpolation.
pub fn dominant_period(values: &[f64], dt: f64) -> Result<f64> {
    let n = values.len();
    if n < 8 {
        return Err(CoreError::config(format!("need at least 8 samples, got {n}")));
    }
    if !(dt > 0.0) {
        return Err(CoreError::config(format!("dt must be positive, got {dt}")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let k_max = n / 2;
    let mut magnitudes = vec![0.0f64; k_max + 1];
    for (k, magnitude) in magnitudes.iter_mut().enumerate().skip(1) {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        let step = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
        for (i, &v) in values.iter().enumerate() {
            let (s, c) = (step * i as f64).sin_cos();
            let x = v - mean;
            re += x * c;
            im += x * s;
        }
        *magnitude = (re * re + im * im).sqrt();
    }
    let mut peak = 2usize;
    for k in 2..=k_max {
        if magnitudes[k] > magnitudes[peak] {
            peak = k;
        }
    }
    let scale = values.iter().map(|v| (v - mean).abs()).fold(0.0f64, f64::max);
    if magnitudes[peak] <= 1e-12 * scale.max(1e-300) * n as f64 || scale == 0.0 {
        return Err(CoreError::numerical("no oscillatory component found"));
    }
    let mut k_refined = peak as f64;
    if peak > 1 && peak < k_max {
        let (alpha, beta, gamma) = (magnitudes[peak - 1], magnitudes[peak], magnitudes[peak + 1]);
        let denom = alpha - 2.0 * beta + gamma;
        if denom.abs() > 0.0 {
            let shift = 0.5 * (alpha - gamma) / denom;
            k_refined += shift.clamp(-0.5, 0.5);
        }
    }
    Ok(n as f64 * dt / k_refined)
}

/// Site populations summed over consecutive bins of `bin_size` molecules;
/// the final bin may be partial.
pub fn bin_site_populations(psi: &StateVector, bin_size: usize) -> Result<Vec<f64>> {
    if bin_size == 0 {
        return Err(CoreError::config("bin_size must be at least 1"));
    }
    let probs: Vec<f64> = psi.molecular_amplitudes().iter().map(|c| c.norm_sqr()).collect();
    Ok(probs.chunks(bin_size).map(|chunk| chunk.iter().sum()).collect())
}

/// Raw probability carried by molecules strictly beyond `threshold` (nm).
pub fn right_tail_mass(psi: &StateVector, realization: &MolecularRealization, threshold: f64) -> f64 {
    psi.molecular_amplitudes()
        .iter()
        .zip(&realization.positions)
        .filter(|(_, &x)| x > threshold)
        .map(|(c, _)| c.norm_sqr())
        .sum()
}
