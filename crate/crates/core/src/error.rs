use thiserror::Error;

use crate::modesolver::ModeLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {lambda_nm} nm outside valid range [{min_nm}, {max_nm}] nm")]
    OutOfRange { lambda_nm: f64, min_nm: f64, max_nm: f64 },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("mode {label} ({polarization}) is cut off at {lambda_nm} nm")]
    Cutoff {
        label: ModeLabel,
        polarization: crate::dispersion::Polarization,
        lambda_nm: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("peak {0} is produced by a single process and carries no spatial entanglement")]
    NotEntangled(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code for the command-line front end: 2 for bad input or
    /// configuration, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::Cutoff { .. } | Error::Degenerate(_) => 3,
            _ => 2,
        }
    }
}
