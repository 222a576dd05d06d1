use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not orthonormal (‖RRᵀ − I‖_F = {drift:e})")]
    NotOrthonormal { drift: f64 },
    #[error("rotation determinant is {det}, expected +1")]
    BadDeterminant { det: f64 },
    #[error("matrix is not skew-symmetric (symmetric part {asymmetry:e})")]
    NotSkew { asymmetry: f64 },
    #[error("matrix is singular (smallest singular value {smallest:e})")]
    Singular { smallest: f64 },
    #[error("matrix is a reflection; no nearby rotation")]
    Reflection,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObserverError {
    #[error("landmark index {index} out of range for {count} landmarks")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("frame carries {got} landmark measurements, observer tracks {expected}")]
    LandmarkCountMismatch { expected: usize, got: usize },
    #[error("at least 3 landmarks are required, got {0}")]
    TooFewLandmarks(usize),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("invalid gain: {0}")]
    InvalidGain(String),
    #[error("observer state became non-finite")]
    NonFinite,
    #[error(transparent)]
    Lie(#[from] LieError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("run aborted at step {step}: {source}")]
    Aborted {
        step: usize,
        #[source]
        source: ObserverError,
    },
    #[error("failed to write metrics: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("at least 3 landmarks are required, got {0}")]
    TooFewLandmarks(usize),
    #[error("landmark bias list has {got} entries, expected {expected}")]
    BiasCountMismatch { expected: usize, got: usize },
    #[error("noise standard deviations must be finite and nonnegative")]
    BadSigma,
}
