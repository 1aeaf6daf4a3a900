use polariton_core::CoreError;
use thiserror::Error;

/// Driver-level errors, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum AppError {
    /// Invalid configuration, preset name, flag, or override. Exit code 2.
    #[error("configuration error: {0}")]
    Config(String),

    /// Eigensolver or observable integrity failure. Exit code 3.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Refused by the resource guard. Exit code 4.
    #[error("resource guard: {0}")]
    Resource(String),

    /// Filesystem or serialization failure. Exit code 1.
    #[error("io error: {0}")]
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Resource(_) => 4,
            AppError::Io(_) => 1,
        }
    }

    /// Prefixes the message with `context`, keeping the variant (and so the
    /// exit code) intact.
    pub fn annotate(self, context: &str) -> Self {
        match self {
            AppError::Config(m) => AppError::Config(format!("{context}: {m}")),
            AppError::Numerical(m) => AppError::Numerical(format!("{context}: {m}")),
            AppError::Resource(m) => AppError::Resource(format!("{context}: {m}")),
            AppError::Io(m) => AppError::Io(format!("{context}: {m}")),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(m) => AppError::Config(m),
            CoreError::Numerical(m) => AppError::Numerical(m),
            CoreError::UndefinedObservable(m) => AppError::Numerical(m),
            CoreError::Io(e) => AppError::Io(e.to_string()),
            CoreError::Serialization(m) => AppError::Io(m),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
