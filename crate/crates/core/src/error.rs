use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A physical parameter violates its invariant.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("eigensolver failed on a {dimension}x{dimension} matrix (max |entry| = {max_abs:e}): {message}")]
    Eigensolver {
        dimension: usize,
        max_abs: f64,
        message: String,
    },

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    /// The Liouvillian kernel is not one-dimensional.
    #[error("steady state is not unique: null space dimension {dimension}")]
    DegenerateSteadyState { dimension: usize },

    #[error("quadrature did not converge: partial result {partial:e}, error estimate {error_estimate:e}")]
    Quadrature { partial: f64, error_estimate: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("rectification ratio undefined: reverse current {reverse:e} is numerically zero")]
    UndefinedRatio { reverse: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidParameter { .. } | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
