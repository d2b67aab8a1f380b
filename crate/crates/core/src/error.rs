use thiserror::Error;

/// Errors raised by the qsync library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |M - M^dagger| entry is {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid channel {label}: {reason}")]
    InvalidChannel { label: String, reason: String },

    #[error("state set is empty")]
    EmptyStateSet,

    #[error("epsilon must lie in (0, 1/2), got {0}")]
    EpsilonOutOfRange(f64),

    #[error("theoretical floor 1 - 2*{epsilon} is not positive (min observed distance {min_observed:e})")]
    FloorNonpositive { epsilon: f64, min_observed: f64 },

    #[error("exploration depth {depth} exceeds the limit {limit}")]
    DepthTooLarge { depth: usize, limit: usize },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("random draw stayed rank-deficient after {attempts} attempts")]
    DegenerateDraw { attempts: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable variant name used in machine-readable error objects.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "NonFinite",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::InvalidState(_) => "InvalidState",
            Error::InvalidChannel { .. } => "InvalidChannel",
            Error::EmptyStateSet => "EmptyStateSet",
            Error::EpsilonOutOfRange(_) => "EpsilonOutOfRange",
            Error::FloorNonpositive { .. } => "FloorNonpositive",
            Error::DepthTooLarge { .. } => "DepthTooLarge",
            Error::EmptyGraph => "EmptyGraph",
            Error::DegenerateDraw { .. } => "DegenerateDraw",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
