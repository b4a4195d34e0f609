use std::path::Path;

use thiserror::Error;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Precondition(String),

    #[error("{0}")]
    Internal(String),

    /// `verify` ran and found the circuits inequivalent.
    #[error("circuits are not equivalent")]
    NotEquivalent,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Precondition(_) => 2,
            CliError::Internal(_) => 3,
            CliError::NotEquivalent => 4,
        }
    }

    pub fn read(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("cannot read {}: {e}", path.display()))
    }

    pub fn write(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Internal(format!("cannot write {}: {e}", path.display()))
    }
}

impl From<unopt_core::Error> for CliError {
    fn from(e: unopt_core::Error) -> Self {
        use unopt_core::Error as E;
        match e {
            E::Parse { .. } | E::Unsupported { .. } | E::InvalidArgument(_) => CliError::Input(e.to_string()),
            E::FewerThanTwoCx
            | E::NoSharingPair
            | E::QubitChoiceExhausted(_)
            | E::TooManyQubits { .. }
            | E::NotElementary
            | E::RankDeficient(_) => CliError::Precondition(e.to_string()),
            E::DimensionMismatch(_) | E::InvalidSupport(_) | E::NotUnitary(_) | E::Numerical(_) => {
                CliError::Internal(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
