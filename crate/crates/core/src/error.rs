use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is singular (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("observation matrix is rank deficient; null direction {combination:?}")]
    RankDeficient { combination: Vec<f64>, condition: f64 },

    #[error("cannot extract physical parameters: |alpha3| = {alpha3:e} below {threshold:e}")]
    ExtractionDegenerate { alpha: [f64; 4], alpha3: f64, threshold: f64 },

    #[error("robust least squares did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence { iterations: usize, last: Vec<f64>, gradient_norm: f64 },

    #[error("time {0} outside the trajectory window [0, 10]")]
    TimeOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sample set was already corrupted (scenario {0})")]
    AlreadyCorrupted(String),

    #[error("all torque measurements are zero")]
    ZeroTorque,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
