//! Exact eigendecomposition and spectral propagation.
//!
//! The Hamiltonian is time independent and modest in size, so dynamics are
//! computed exactly: diagonalize once with LAPACK's divide-and-conquer
//! Hermitian solver (zheevd), then evolve any state through
//! `psi(t) = V exp(-i E t / hbar) V^dagger psi(0)`.

use std::ffi::c_char;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::constants::HBAR_EV_FS;
use crate::error::{CoreError, Result};
use crate::hamiltonian::HamiltonianMatrix;
use crate::C64;

/// Largest acceptable Hermiticity violation max|H_ij - conj(H_ji)|, eV.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Relative residual bound ||H v - e v|| / ||H|| enforced on spot-checked
/// eigenpairs after diagonalization.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Norm drift bound |norm(psi(t)) - norm(psi(0))| enforced on every
/// reconstruction.
pub const NORM_TOL: f64 = 1e-10;

/// Full spectral decomposition of a Hamiltonian.
///
/// `eigenvalues` ascend; column `k` of `eigenvectors` is the eigenstate of
/// `eigenvalues[k]` in the molecules-first basis.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<C64>,
    pub n_molecules: usize,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Normalized state in the molecules-first basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Array1<C64>,
    pub n_molecules: usize,
}

impl StateVector {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_modes(&self) -> usize {
        self.dim() - self.n_molecules
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn molecular_amplitudes(&self) -> ndarray::ArrayView1<'_, C64> {
        self.amplitudes.slice(ndarray::s![..self.n_molecules])
    }

    pub fn photon_amplitudes(&self) -> ndarray::ArrayView1<'_, C64> {
        self.amplitudes.slice(ndarray::s![self.n_molecules..])
    }
}

/// FNV-1a hash of the matrix payload, reported in diagnostics so failures can
/// be tied to a concrete input.
fn matrix_fingerprint(h: &Array2<C64>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: [u8; 8]| {
        for b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
        }
    };
    for z in h.iter() {
        eat(z.re.to_le_bytes());
        eat(z.im.to_le_bytes());
    }
    hash
}

fn zheevd_in_place(a: &mut Array2<C64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    let n_i = n as i32;
    let mut w = vec![0.0f64; n];
    let mut info: i32 = 0;
    let jobz = b'V' as c_char;
    // The buffer is row major; LAPACK sees the transpose, which for a
    // Hermitian input is the conjugate. Eigenvalues agree and eigenvectors
    // come back conjugated, which `diagonalize` undoes.
    let uplo = b'L' as c_char;
    let ptr = a
        .as_slice_mut()
        .ok_or_else(|| CoreError::numerical("matrix buffer is not contiguous"))?
        .as_mut_ptr();

    let minus_one = -1i32;
    let mut work_query = C64::new(0.0, 0.0);
    let mut rwork_query = 0.0f64;
    let mut iwork_query = 0i32;
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &n_i,
            ptr.cast(),
            &n_i,
            w.as_mut_ptr(),
            (&mut work_query as *mut C64).cast(),
            &minus_one,
            &mut rwork_query,
            &minus_one,
            &mut iwork_query,
            &minus_one,
            &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::numerical(format!("zheevd workspace query failed: info={info}")));
    }
    let lwork = work_query.re as i32;
    let lrwork = rwork_query as i32;
    let liwork = iwork_query;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    let mut rwork = vec![0.0f64; lrwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &n_i,
            ptr.cast(),
            &n_i,
            w.as_mut_ptr(),
            work.as_mut_ptr().cast(),
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr().cast(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::numerical(format!("zheevd failed to converge: info={info}")));
    }
    Ok(Array1::from(w))
}

/// Diagonalizes a Hamiltonian.
///
/// Validates Hermiticity up to [`HERMITICITY_TOL`], then spot-checks the
/// residual of the first, middle, and last eigenpairs against
/// [`RESIDUAL_TOL`] relative to the spectral norm.
pub fn diagonalize(h: &HamiltonianMatrix) -> Result<Spectrum> {
    let n = h.matrix.nrows();
    if n != h.matrix.ncols() || n == 0 {
        return Err(CoreError::config(format!("matrix must be square and nonempty, got {n} rows")));
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let v = (h.matrix[[i, j]] - h.matrix[[j, i]].conj()).norm();
            if v > worst {
                worst = v;
            }
        }
    }
    if worst > HERMITICITY_TOL {
        return Err(CoreError::numerical(format!(
            "matrix is not Hermitian: max asymmetry {worst:.3e} (fingerprint {:016x})",
            matrix_fingerprint(&h.matrix)
        )));
    }

    let mut buf = h.matrix.clone();
    let eigenvalues = zheevd_in_place(&mut buf)?;
    // Undo the transpose-conjugation: eigenvectors into columns.
    let eigenvectors = buf.t().mapv(|z| z.conj());

    for win in eigenvalues.windows(2) {
        if win[0] > win[1] {
            return Err(CoreError::numerical("eigenvalues not sorted ascending"));
        }
    }

    let scale = eigenvalues
        .iter()
        .fold(0.0f64, |m, &e| m.max(e.abs()))
        .max(1.0);
    for &k in &[0usize, n / 2, n - 1] {
        let v = eigenvectors.column(k);
        let hv = h.matrix.dot(&v);
        let mut res = 0.0f64;
        let mut vnorm = 0.0f64;
        for (hv_i, v_i) in hv.iter().zip(v.iter()) {
            res += (hv_i - v_i * eigenvalues[k]).norm_sqr();
            vnorm += v_i.norm_sqr();
        }
        let res = res.sqrt();
        if res > RESIDUAL_TOL * scale || (vnorm.sqrt() - 1.0).abs() > RESIDUAL_TOL {
            return Err(CoreError::numerical(format!(
                "eigenpair {k} fails the residual check: ||Hv - ev|| = {res:.3e}, \
                 ||v|| = {:.12} (fingerprint {:016x})",
                vnorm.sqrt(),
                matrix_fingerprint(&h.matrix)
            )));
        }
    }

    Ok(Spectrum { eigenvalues, eigenvectors, n_molecules: h.n_molecules })
}

/// Expands a state in the eigenbasis: `c = V^dagger psi`.
pub fn expand(spectrum: &Spectrum, psi: &StateVector) -> Result<Array1<C64>> {
    if psi.dim() != spectrum.dim() {
        return Err(CoreError::config(format!(
            "state dimension {} does not match spectrum dimension {}",
            psi.dim(),
            spectrum.dim()
        )));
    }
    // V^dagger psi = conj(V^T conj(psi)); only vectors are conjugated so the
    // matrix-vector product stays a single BLAS call.
    let conj_psi = psi.amplitudes.mapv(|z| z.conj());
    Ok(spectrum.eigenvectors.t().dot(&conj_psi).mapv(|z| z.conj()))
}

/// Reconstructs `psi(t) = V (c . exp(-i E t / hbar))` from eigenbasis
/// coefficients. Errors if the reconstruction drifts in norm beyond
/// [`NORM_TOL`].
pub fn reconstruct(spectrum: &Spectrum, coefficients: &Array1<C64>, time: f64) -> Result<StateVector> {
    if coefficients.len() != spectrum.dim() {
        return Err(CoreError::config(format!(
            "coefficient dimension {} does not match spectrum dimension {}",
            coefficients.len(),
            spectrum.dim()
        )));
    }
    let phased = Array1::from_iter(
        spectrum
            .eigenvalues
            .iter()
            .zip(coefficients.iter())
            .map(|(&e, &c)| c * C64::from_polar(1.0, -e * time / HBAR_EV_FS)),
    );
    let amplitudes = spectrum.eigenvectors.dot(&phased);
    let state = StateVector { amplitudes, n_molecules: spectrum.n_molecules };

    let in_norm = coefficients.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (state.norm() - in_norm).abs() > NORM_TOL {
        return Err(CoreError::numerical(format!(
            "propagation lost unitarity at t = {time} fs: norm {} vs {}",
            state.norm(),
            in_norm
        )));
    }
    Ok(state)
}

/// Propagates a state to time `t` (fs).
pub fn propagate(spectrum: &Spectrum, psi0: &StateVector, time: f64) -> Result<StateVector> {
    let coefficients = expand(spectrum, psi0)?;
    reconstruct(spectrum, &coefficients, time)
}

/// Energy expectation value `<psi|H|psi>`, eV.
pub fn expectation_energy(h: &HamiltonianMatrix, psi: &StateVector) -> Result<f64> {
    if psi.dim() != h.dim() {
        return Err(CoreError::config(format!(
            "state dimension {} does not match Hamiltonian dimension {}",
            psi.dim(),
            h.dim()
        )));
    }
    let h_psi = h.matrix.dot(&psi.amplitudes);
    let e: C64 = psi.amplitudes.iter().zip(h_psi.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(e.re)
}

const CACHE_MAGIC: &[u8; 8] = b"PWSPECT\0";
const CACHE_VERSION: u32 = 1;

/// Stores a spectrum keyed by a caller-supplied hash of the Hamiltonian
/// inputs. Little-endian throughout.
pub fn save_cache(path: &Path, spectrum: &Spectrum, key: u64) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    out.write_all(CACHE_MAGIC)?;
    out.write_all(&CACHE_VERSION.to_le_bytes())?;
    out.write_all(&[0u8; 4])?;
    out.write_all(&key.to_le_bytes())?;
    out.write_all(&(spectrum.dim() as u64).to_le_bytes())?;
    out.write_all(&(spectrum.n_molecules as u64).to_le_bytes())?;
    for &e in spectrum.eigenvalues.iter() {
        out.write_all(&e.to_le_bytes())?;
    }
    for z in spectrum.eigenvectors.iter() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Loads a spectrum saved by [`save_cache`], verifying the key.
pub fn load_cache(path: &Path, expected_key: u64) -> Result<Spectrum> {
    let file = std::fs::File::open(path)?;
    let mut input = BufReader::new(file);
    let mut header = [0u8; 40];
    input.read_exact(&mut header)?;
    if &header[0..8] != CACHE_MAGIC {
        return Err(CoreError::Serialization("bad spectrum cache magic".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(CoreError::Serialization(format!("unsupported cache version {version}")));
    }
    let key = u64::from_le_bytes(header[16..24].try_into().unwrap());
    if key != expected_key {
        return Err(CoreError::Serialization(format!(
            "cache key mismatch: stored {key:016x}, expected {expected_key:016x}"
        )));
    }
    let dim = u64::from_le_bytes(header[24..32].try_into().unwrap()) as usize;
    let n_molecules = u64::from_le_bytes(header[32..40].try_into().unwrap()) as usize;

    let mut evals = vec![0u8; dim * 8];
    input.read_exact(&mut evals)?;
    let eigenvalues = Array1::from_iter(
        evals.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())),
    );
    let mut evecs = vec![0u8; dim * dim * 16];
    input.read_exact(&mut evecs)?;
    let data: Vec<C64> = evecs
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    let eigenvectors = Array2::from_shape_vec((dim, dim), data)
        .map_err(|e| CoreError::Serialization(format!("bad cache shape: {e}")))?;
    Ok(Spectrum { eigenvalues, eigenvectors, n_molecules })
}
