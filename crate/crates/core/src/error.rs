use thiserror::Error;

/// Errors raised by the field, measure and exponent routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({x}, {y}) is not strictly inside the {domain}")]
    OutOfDomain { x: f64, y: f64, domain: &'static str },

    #[error("the two points coincide")]
    CoincidentPoints,

    #[error("distance {dist} to the boundary is below the required {required}")]
    BoundaryTooClose { dist: f64, required: f64 },

    #[error("angle {0} is degenerate (must lie strictly between 0 and pi)")]
    DegenerateAngle(f64),

    #[error("invalid cutoff {0}: need at least one mode")]
    InvalidCutoff(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("gamma = {gamma} is outside the supported range [0, {max})")]
    GammaOutOfRange { gamma: f64, max: f64 },

    #[error("delta = {delta} must lie in (0, {total})")]
    DeltaOutOfRange { delta: f64, total: f64 },

    #[error("radius {radius} spans fewer than two cells at resolution {resolution}")]
    ResolutionTooCoarse { radius: f64, resolution: usize },

    #[error("scale {scale}: only {hits} hits after {samples} samples")]
    InsufficientHits { scale: f64, hits: u64, samples: u64 },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
