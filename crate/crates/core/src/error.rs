use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants map onto the CLI exit codes: configuration problems exit
/// with 2, data problems with 3 and numerical failures with 4.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration error at line {line}, field `{field}`: {reason}")]
    Config {
        line: usize,
        field: String,
        reason: String,
    },

    #[error("degenerate arm: {0}")]
    DegenerateArm(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular design in local linear fit: {0}")]
    SingularDesign(String),

    #[error("empty effective sample: {0}")]
    EmptySample(String),

    #[error("conditioning event never observed: {0}")]
    InfeasibleConditioning(String),

    #[error("matrix is not positive semidefinite: {0}")]
    NotPositiveSemidefinite(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Config { .. } | Error::Io(_) => 2,
            Error::DegenerateArm(_)
            | Error::DimensionMismatch { .. }
            | Error::Data(_)
            | Error::EmptySample(_)
            | Error::SingularDesign(_)
            | Error::InfeasibleConditioning(_) => 3,
            Error::NotPositiveSemidefinite(_) | Error::Numerical(_) => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
