use thiserror::Error;

#[derive(Debug, Error)]
pub enum PadmmError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("constants undefined: {0}")]
    ConstantsUndefined(String),

    #[error("update oracle for {target} failed: {message}")]
    Oracle { target: UpdateTarget, message: String },
}

/// Which subproblem an oracle failure came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateTarget {
    Block(usize),
    Y,
}

impl std::fmt::Display for UpdateTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UpdateTarget::Block(i) => write!(f, "block {i}"),
            UpdateTarget::Y => write!(f, "y"),
        }
    }
}

/// Error returned by user-supplied subproblem oracles.
#[derive(Debug, Clone, Error)]
#[error("{0}")]
pub struct OracleError(pub String);

impl OracleError {
    pub fn new(msg: impl Into<String>) -> Self {
        OracleError(msg.into())
    }
}

pub type Result<T, E = PadmmError> = std::result::Result<T, E>;
