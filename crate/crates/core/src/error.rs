use thiserror::Error;

use crate::experiment::config::ConfigError;
use crate::noise::calibration::CalibrationError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("two-qubit gate targets must be distinct, got ({0}, {0})")]
    DuplicateTargets(usize),

    #[error("{what}: {n_qubits} qubits exceeds the cap of {cap}")]
    TooManyQubits {
        what: &'static str,
        n_qubits: usize,
        cap: usize,
    },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state vector is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("gate {0} is not in the native set {{RZ, SX, X, CZ}}; transpile first")]
    NonNativeGate(&'static str),

    #[error("circuit qubit {0} has no row in the calibration table")]
    UnknownQubit(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Calibration(#[from] CalibrationError),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
