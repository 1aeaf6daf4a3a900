//! Driver library behind the `simulate` binary: configuration schema,
//! experiment presets, run orchestration, and output manifests.

pub mod config;
pub mod driver;
pub mod error;
pub mod manifest;
pub mod presets;
pub mod runner;

pub use error::AppError;
