use thiserror::Error;

/// Errors raised by the library and the command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {point:?} is outside the interior of the domain of {function}")]
    Domain { function: String, point: Vec<f64> },

    #[error("point {point:?} is outside the interior of the conjugate domain of {function}")]
    ConjugateDomain { function: String, point: Vec<f64> },

    #[error("exponent argument {argument} exceeds the supported range of +/-{limit}")]
    Range { argument: f64, limit: f64 },

    #[error("invalid Legendre specification: {0}")]
    InvalidSpec(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("projection is not unique at {point:?}")]
    NotUnique { point: Vec<f64> },

    #[error("Hessian of {function} is not positive definite at {point:?}")]
    NotPositiveDefinite { function: String, point: Vec<f64> },

    #[error("unknown function name `{0}`")]
    UnknownFunction(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
