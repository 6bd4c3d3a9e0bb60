use qmacro::catalog::CatalogError;
use qmacro::diffraction::DiffractionError;
use qmacro::fisher::FisherError;
use qmacro::measures::MeasureError;
use qmacro::oscillator::OscillatorError;
use qmacro::quantum::QuantumError;
use qmacro::wigner::WignerError;
use thiserror::Error;

/// Failure classes with fixed exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input: config, grid or scan file.
    #[error("parse error: {0}")]
    Parse(String),
    /// Inputs parse but violate a physical precondition.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("reconstruction error: {0}")]
    Reconstruction(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Reconstruction(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

macro_rules! domain {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain(e.to_string())
            }
        }
    )*};
}

domain!(QuantumError, FisherError, MeasureError, OscillatorError, CatalogError);

impl From<WignerError> for CliError {
    fn from(e: WignerError) -> Self {
        use WignerError::*;
        match e {
            Io(_) | MalformedHeader { .. } | AxisCountMismatch { .. } | InvalidNumber { .. } | NonFinite { .. }
            | Normalization(_) | Bound(_) => CliError::Parse(e.to_string()),
            Unfaithful { .. } => CliError::Reconstruction(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<DiffractionError> for CliError {
    fn from(e: DiffractionError) -> Self {
        use DiffractionError::*;
        match e {
            Io(_) | Malformed { .. } | Unnormalized { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}
