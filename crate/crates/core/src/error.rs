use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Spectral radius (discrete) or abscissa (continuous) violates the stability margin.
    #[error("unstable matrix: {measure} = {value} violates bound {bound}")]
    UnstableMatrix {
        measure: &'static str,
        value: f64,
        bound: f64,
    },

    /// The Gramian is not numerically positive definite; usually an unreachable pair.
    #[error("gramian is not positive definite: {0}")]
    SingularGramian(String),

    #[error("rows are not orthonormal: deviation {deviation:e} exceeds {tol:e}")]
    NotCoisometric { deviation: f64, tol: f64 },

    #[error("resolvent is numerically singular (reciprocal condition {rcond:e})")]
    SingularResolvent { rcond: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("model failed validation: {0}")]
    Validation(String),

    #[error("step too large: h * |abscissa| = {product} exceeds 0.5")]
    StepTooLarge { product: f64 },

    #[error("insufficient data: {samples} samples for {lags} lags (need more than {})", 10 * lags)]
    InsufficientData { samples: usize, lags: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
