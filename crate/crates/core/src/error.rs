use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse configuration: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("punctures {first} and {second} coincide")]
    DuplicatePuncture { first: usize, second: usize },

    #[error("{punctures} punctures but {weights} weights")]
    LengthMismatch { punctures: usize, weights: usize },

    #[error("puncture {index} has a non-finite coordinate")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation point coincides with puncture {index} (distance {distance:e})")]
    AtPuncture { index: usize, distance: f64 },

    #[error("finite-difference step {h:e} too large: clearance {clearance:e} must exceed 10h")]
    StepTooLarge { h: f64, clearance: f64 },

    #[error("evaluation point within {distance:e} of the Dirac string of puncture {index}")]
    StringProximity { index: usize, distance: f64 },

    #[error("expected a unit vector, got norm {norm}")]
    NonUnitVector { norm: f64 },

    #[error("direction vector has zero length")]
    ZeroVector,

    #[error("puncture {index} sits at the origin")]
    OriginPuncture { index: usize },

    #[error("infinite product cannot be certified: {0}")]
    ConvergenceUnattainable(String),

    #[error("contour passes within {distance:e} of a zero")]
    ContourThroughZero { distance: f64 },

    #[error("transition has a pole at u = {u}")]
    PoleAtU { u: crate::Complex },

    #[error("fibre coordinate must be nonzero")]
    ZeroFibre,

    #[error("zero separation {separation:e} too small to isolate the zero")]
    ZeroSeparationTooSmall { separation: f64 },

    #[error("chart {0} is not part of this atlas")]
    UnknownChart(String),
}
