use thiserror::Error;

/// Library-level failures. The CLI maps these onto process exit codes:
/// config problems exit 2, non-finite aborts exit 3, failed checks exit 1.
#[derive(Debug, Error)]
pub enum NullwaveError {
    #[error("grid: {0}")]
    Grid(String),

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("config file `{path}`: {msg}")]
    ConfigFile { path: String, msg: String },

    #[error("non-finite value in {context} at marching step {step}")]
    NonFinite { context: String, step: usize },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NullwaveError>;
