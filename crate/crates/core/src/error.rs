use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point outside the model domain: 1 + kappa_b (x^2 + y^2) / 4 = {0}")]
    Domain(f64),
    #[error("helicoid residual undefined near a tangent pole (cos = {0:e})")]
    PoleAdjacent(f64),
    #[error("initialization failed: {0}")]
    Initialization(String),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64, history: Vec<f64> },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("unresolved boundary trace on {arc}: {samples} samples, refine the mesh")]
    UnresolvedTrace { arc: String, samples: usize },
    #[error("no root in [0, pi/2]: {0}")]
    NoRoot(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
