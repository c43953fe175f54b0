use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("operation needs a smooth boundary: {0}")]
    UnsupportedSmoothness(String),

    #[error("Gauss map is degenerate: {0}")]
    DegenerateGaussMap(String),

    #[error("body does not fit the computational domain: {0}")]
    Geometry(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("iterate grew beyond the admissible domain (diameter {diameter})")]
    UnboundedGrowth { diameter: f64 },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
