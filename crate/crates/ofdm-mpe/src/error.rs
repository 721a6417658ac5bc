use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("bad input grid: {0}")]
    Input(String),
    #[error("estimation failed: {0}")]
    Estimation(ofdm_mpe_core::Error),
    #[error("validation failed: {case} residual {value:.3e} (limit {limit:.3e})")]
    Validation {
        case: &'static str,
        value: f64,
        limit: f64,
        code: i32,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Input(_) => 5,
            CliError::Estimation(_) => 4,
            CliError::Validation { code, .. } => *code,
        }
    }
}

impl From<ofdm_mpe_core::Error> for CliError {
    fn from(e: ofdm_mpe_core::Error) -> Self {
        match e {
            ofdm_mpe_core::Error::SingularGram { .. } => CliError::Estimation(e),
            ofdm_mpe_core::Error::DimensionMismatch { .. } => CliError::Input(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
