use thiserror::Error;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("duplicate points at indices ({0}, {1})")]
    DuplicatePoints(usize, usize),

    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("simplex {0:?} not found in complex")]
    SimplexNotFound(Vec<usize>),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),

    #[error("Betti number mismatch for p = {p}: spectral {spectral}, rank-based {exact}")]
    BettiMismatch { p: usize, spectral: usize, exact: usize },

    #[error("complex is disconnected (beta_0 = {0})")]
    Disconnected(usize),

    #[error("vector is not unit norm (norm {0})")]
    NotUnitNorm(f64),

    #[error("transport solver failed: {0}")]
    Transport(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("undefined distance: {0}")]
    Undefined(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::TooLarge(_) => ErrorClass::Config,
            Error::BettiMismatch { .. }
            | Error::NotSymmetric(_)
            | Error::NotUnitNorm(_)
            | Error::Transport(_)
            | Error::Consistency(_) => ErrorClass::Numerical,
            Error::Context { source, .. } => source.class(),
            _ => ErrorClass::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
