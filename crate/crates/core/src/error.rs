use thiserror::Error;

/// Errors surfaced by the simulation library.
///
/// `Config` covers invalid physical parameters detected before any numerics
/// run, `Numerical` covers eigensolver or integrity failures, and `Io` wraps
/// file-format problems in the serialization helpers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("undefined observable: {0}")]
    UndefinedObservable(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl CoreError {
    pub fn config(msg: impl Into<String>) -> Self {
        CoreError::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CoreError::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
