//! Assembly of the single-excitation Hamiltonian.
//!
//! Basis order is molecules first: indices `0..n_molecules` are site
//! excitations |1_n>, indices `n_molecules..n_molecules + n_modes` are photon
//! modes |q_j> in mode-set order. The only nonzero off-diagonal elements are
//! the molecule-photon couplings
//!
//! `<1_n|H|q> = -i (Omega_R / 2) sqrt(E_n / (N_M hbar omega_q)) exp(i q x_n)`
//!
//! and their Hermitian mirrors; the photon-photon and molecule-molecule
//! blocks are diagonal.

use std::io::{Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::disorder::MolecularRealization;
use crate::error::{CoreError, Result};
use crate::modes::CavityModeSet;
use crate::C64;

/// Collective light-matter coupling strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    /// Rabi splitting Omega_R at resonance, eV.
    pub rabi_splitting: f64,
}

impl CouplingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rabi_splitting >= 0.0) {
            return Err(CoreError::config(format!(
                "rabi_splitting must be nonnegative, got {}",
                self.rabi_splitting
            )));
        }
        Ok(())
    }
}

/// Dense Hermitian Hamiltonian in the molecules-first basis, eV.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub matrix: Array2<C64>,
    pub n_molecules: usize,
    pub n_modes: usize,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.n_molecules + self.n_modes
    }
}

/// Single molecule-photon coupling element `<1_n|H|q>`.
pub fn coupling_element(
    site_energy: f64,
    site_position: f64,
    q: f64,
    mode_energy: f64,
    rabi_splitting: f64,
    n_molecules: usize,
) -> Result<C64> {
    if !(site_energy > 0.0) {
        return Err(CoreError::config(format!("site energy must be positive, got {site_energy}")));
    }
    if !(mode_energy > 0.0) {
        return Err(CoreError::config(format!("mode energy must be positive, got {mode_energy}")));
    }
    if n_molecules == 0 {
        return Err(CoreError::config("n_molecules must be at least 1"));
    }
    if !(rabi_splitting >= 0.0) {
        return Err(CoreError::config(format!(
            "rabi_splitting must be nonnegative, got {rabi_splitting}"
        )));
    }
    let magnitude =
        0.5 * rabi_splitting * (site_energy / (n_molecules as f64 * mode_energy)).sqrt();
    // -i e^{i q x} = e^{i (q x - pi/2)}
    Ok(C64::new(0.0, -magnitude) * C64::from_polar(1.0, q * site_position))
}

/// Assembles the dense Hamiltonian for one realization and mode set.
pub fn assemble(
    realization: &MolecularRealization,
    modes: &CavityModeSet,
    coupling: &CouplingSpec,
) -> Result<HamiltonianMatrix> {
    coupling.validate()?;
    let n_mol = realization.n_molecules();
    if n_mol == 0 {
        return Err(CoreError::config("realization holds no molecules"));
    }
    if realization.positions.len() != n_mol {
        return Err(CoreError::config(format!(
            "realization has {} energies but {} positions",
            n_mol,
            realization.positions.len()
        )));
    }
    if modes.is_empty() {
        return Err(CoreError::config("mode set is empty"));
    }
    let n_modes = modes.len();
    let dim = n_mol + n_modes;

    let mut h = Array2::<C64>::zeros((dim, dim));
    for (n, &e) in realization.energies.iter().enumerate() {
        if !(e > 0.0) {
            return Err(CoreError::config(format!("site {n} has nonpositive energy {e}")));
        }
        h[[n, n]] = C64::new(e, 0.0);
    }
    for (j, mode) in modes.modes.iter().enumerate() {
        h[[n_mol + j, n_mol + j]] = C64::new(mode.energy, 0.0);
    }
    for (j, mode) in modes.modes.iter().enumerate() {
        let col = n_mol + j;
        for n in 0..n_mol {
            let g = coupling_element(
                realization.energies[n],
                realization.positions[n],
                mode.q,
                mode.energy,
                coupling.rabi_splitting,
                n_mol,
            )?;
            h[[n, col]] = g;
            h[[col, n]] = g.conj();
        }
    }

    Ok(HamiltonianMatrix { matrix: h, n_molecules: n_mol, n_modes })
}

const DUMP_MAGIC: &[u8; 8] = b"PWIREHAM";
const DUMP_VERSION: u32 = 1;
const BASIS_TAG: &[u8; 8] = b"MOLPHOT\0";

/// Writes the matrix for offline inspection: a 32-byte header (magic,
/// version, n_molecules, n_modes, basis-order tag, padding) followed by the
/// row-major complex128 little-endian payload.
pub fn dump_matrix<W: Write>(h: &HamiltonianMatrix, mut out: W) -> Result<()> {
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&DUMP_VERSION.to_le_bytes())?;
    out.write_all(&(h.n_molecules as u32).to_le_bytes())?;
    out.write_all(&(h.n_modes as u32).to_le_bytes())?;
    out.write_all(BASIS_TAG)?;
    out.write_all(&[0u8; 4])?;
    for z in h.matrix.iter() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a matrix written by [`dump_matrix`].
pub fn read_matrix<R: Read>(mut input: R) -> Result<HamiltonianMatrix> {
    let mut header = [0u8; 32];
    input.read_exact(&mut header)?;
    if &header[0..8] != DUMP_MAGIC {
        return Err(CoreError::Serialization("bad matrix dump magic".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != DUMP_VERSION {
        return Err(CoreError::Serialization(format!("unsupported dump version {version}")));
    }
    if &header[20..28] != BASIS_TAG {
        return Err(CoreError::Serialization("unknown basis-order tag".into()));
    }
    let n_mol = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let n_modes = u32::from_le_bytes(header[16..20].try_into().unwrap()) as usize;
    let dim = n_mol + n_modes;
    let mut buf = vec![0u8; dim * dim * 16];
    input.read_exact(&mut buf)?;
    let data: Vec<C64> = buf
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    let matrix = Array2::from_shape_vec((dim, dim), data)
        .map_err(|e| CoreError::Serialization(format!("bad dump shape: {e}")))?;
    Ok(HamiltonianMatrix { matrix, n_molecules: n_mol, n_modes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{sample_realization, DisorderSpec};
    use crate::modes::{build_mode_set, Directionality, ModeTruncation, WireConfig};
    use approx::assert_relative_eq;

    fn wire(n: usize) -> WireConfig {
        WireConfig {
            n_molecules: n,
            spacing: 10.0,
            l_y: 200.0,
            l_z: 400.0,
            epsilon: 3.0,
            mean_exciton_energy: 2.0,
        }
    }

    fn ordered_h(n_mol: usize, n_modes: usize, rabi: f64) -> HamiltonianMatrix {
        let w = wire(n_mol);
        let r = sample_realization(&w, &DisorderSpec::NONE, 1).unwrap();
        let m = build_mode_set(&w, ModeTruncation::Count(n_modes), Directionality::Bidirectional)
            .unwrap();
        assemble(&r, &m, &CouplingSpec { rabi_splitting: rabi }).unwrap()
    }

    #[test]
    fn coupling_element_reference_magnitude_and_phase() {
        // Resonant element at q = 0: magnitude Omega/(2 sqrt(N_M)), phase -i.
        let g = coupling_element(2.0, 170.0, 0.0, 2.0, 0.1, 5000).unwrap();
        assert_relative_eq!(g.im, -0.0007071067811865475, max_relative = 1e-12);
        assert_eq!(g.re, 0.0);
    }

    #[test]
    fn coupling_element_phase_winds_with_position() {
        let q = 0.01;
        let x = 230.0;
        let g = coupling_element(2.0, x, q, 2.1, 0.1, 100).unwrap();
        let expected_arg = q * x - std::f64::consts::FRAC_PI_2;
        let mut diff = g.arg() - expected_arg;
        while diff > std::f64::consts::PI {
            diff -= 2.0 * std::f64::consts::PI;
        }
        while diff < -std::f64::consts::PI {
            diff += 2.0 * std::f64::consts::PI;
        }
        assert!(diff.abs() < 1e-12);
        // Detuned magnitude carries sqrt(E_n / hbar omega_q).
        assert_relative_eq!(
            g.norm(),
            0.05 * (2.0f64 / (100.0 * 2.1)).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_rabi_gives_zero_coupling() {
        let g = coupling_element(2.0, 55.0, 0.02, 2.3, 0.0, 10).unwrap();
        assert_eq!(g, C64::new(0.0, 0.0));
    }

    #[test]
    fn coupling_element_rejects_nonpositive_energies() {
        assert!(coupling_element(0.0, 0.0, 0.0, 2.0, 0.1, 10).is_err());
        assert!(coupling_element(2.0, 0.0, 0.0, 0.0, 0.1, 10).is_err());
        assert!(coupling_element(2.0, 0.0, 0.0, 2.0, -0.1, 10).is_err());
    }

    #[test]
    fn assemble_zero_coupling_is_diagonal() {
        let h = ordered_h(2, 1, 0.0);
        assert_eq!(h.dim(), 3);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert!(h.matrix[[i, j]].re > 0.0);
                } else {
                    assert_eq!(h.matrix[[i, j]], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn assemble_is_hermitian_bitwise() {
        let w = wire(40);
        let r = sample_realization(&w, &DisorderSpec { sigma_m: 0.03, sigma_a: 1.0 }, 11).unwrap();
        let m = build_mode_set(&w, ModeTruncation::Count(9), Directionality::Bidirectional)
            .unwrap();
        let h = assemble(&r, &m, &CouplingSpec { rabi_splitting: 0.1 }).unwrap();
        let n_mol = h.n_molecules;
        for i in 0..h.dim() {
            assert_eq!(h.matrix[[i, i]].im, 0.0);
            for j in 0..h.dim() {
                let a = h.matrix[[i, j]];
                let b = h.matrix[[j, i]].conj();
                assert_eq!(a, b);
                // Coupling blocks mirror exactly, bit for bit.
                if (i < n_mol) != (j < n_mol) {
                    assert_eq!(a.re.to_bits(), b.re.to_bits());
                    assert_eq!(a.im.to_bits(), b.im.to_bits());
                }
            }
        }
    }

    #[test]
    fn off_diagonal_sparsity_count() {
        let (n_mol, n_modes) = (25, 7);
        let h = ordered_h(n_mol, n_modes, 0.1);
        let nonzero = h
            .matrix
            .indexed_iter()
            .filter(|((i, j), z)| i != j && z.norm() > 0.0)
            .count();
        assert_eq!(nonzero, 2 * n_mol * n_modes);
        // Both cross blocks only: molecule-molecule and photon-photon stay zero.
        for i in 0..n_mol {
            for j in 0..n_mol {
                if i != j {
                    assert_eq!(h.matrix[[i, j]], C64::new(0.0, 0.0));
                }
            }
        }
        for i in n_mol..n_mol + n_modes {
            for j in n_mol..n_mol + n_modes {
                if i != j {
                    assert_eq!(h.matrix[[i, j]], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn matrix_dump_round_trips() {
        let h = ordered_h(6, 3, 0.08);
        let mut buf = Vec::new();
        dump_matrix(&h, &mut buf).unwrap();
        assert_eq!(buf.len(), 32 + h.dim() * h.dim() * 16);
        let back = read_matrix(buf.as_slice()).unwrap();
        assert_eq!(back.n_molecules, h.n_molecules);
        assert_eq!(back.n_modes, h.n_modes);
        assert_eq!(back.matrix, h.matrix);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_matrix(bad.as_slice()).is_err());
    }
}
