use thiserror::Error;

/// Errors shared across the compilation and simulation stages.
///
/// The variants map onto the process exit codes used by the CLI: anything
/// that means "your input is malformed" is `Validation`-like (exit 2),
/// `SimulationBound` means the request was legal but too large to simulate
/// (exit 3), and I/O or serialization failures are environmental (exit 4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),

    #[error("unsupported gate {gate} in {context}")]
    UnsupportedGate { gate: String, context: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("simulation bound exceeded: {0}")]
    SimulationBound(String),

    #[error("calibration: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn unsupported(gate: impl Into<String>, context: impl Into<String>) -> Self {
        Error::UnsupportedGate {
            gate: gate.into(),
            context: context.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
