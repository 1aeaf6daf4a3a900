//! Single-excitation simulation of coherent exciton wave packet transport in a
//! lossless multimode polaritonic wire.
//!
//! The crate builds dense Tavis-Cummings-style Hamiltonians for a chain of
//! two-level emitters coupled to the longitudinal mode ladder of a rectangular
//! waveguide, propagates initial exciton wave packets exactly through the full
//! eigendecomposition, and extracts transport observables (wave packet width,
//! molecular population, photon-mode weights) for single realizations and for
//! disorder ensembles.
//!
//! All energies are in eV, lengths in nm, and times in fs; see [`constants`].

pub mod constants;
pub mod disorder;
pub mod ensemble;
pub mod hamiltonian;
pub mod io;
pub mod modes;
pub mod observables;
pub mod simulation;
pub mod spectrum;
pub mod wavepacket;

mod error;

pub use error::CoreError;

// Links the system BLAS/LAPACK library that backs both ndarray's complex
// matrix products and the raw eigensolver bindings.
use openblas_src as _;

/// Complex double-precision scalar used for all amplitudes.
pub type C64 = num_complex::Complex64;
