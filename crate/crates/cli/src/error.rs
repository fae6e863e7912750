use thiserror::Error;

/// Exit codes: 0 all checks pass, 1 a declared check failed, 2 invalid
/// usage or config, 3 numerical or I/O error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Numerics(#[from] brox_core::Error),
    #[error("{0}")]
    Report(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
