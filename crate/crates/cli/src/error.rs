use thiserror::Error;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid experiment spec: {0}")]
    Schema(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Outputs were written, but analytic and simulated values disagree.
    #[error("analytic and simulated values disagree: {0}")]
    Mismatch(String),

    #[error("optimizer failed: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Mismatch(_) => 4,
            CliError::Solver(_) => 5,
        }
    }
}

impl From<agebench::Error> for CliError {
    fn from(e: agebench::Error) -> Self {
        use agebench::Error as E;
        match e {
            E::Domain(_) | E::InvalidConfig(_) => CliError::Schema(e.to_string()),
            E::Numeric { .. } | E::InsufficientData { .. } => CliError::Numeric(e.to_string()),
            E::Solver { .. } => CliError::Solver(e.to_string()),
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
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Schema(e.to_string())
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
