use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("number of oscillators must be even and at least 4, got {0}")]
    InvalidChainSize(usize),

    #[error("base frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),

    #[error("temperature must be non-negative and finite, got {0}")]
    InvalidTemperature(f64),

    #[error("coupling bound must be non-negative and finite, got {0}")]
    InvalidCouplingBound(f64),

    #[error("segment {index}: duration must be positive and finite, got {duration}")]
    InvalidDuration { index: usize, duration: f64 },

    #[error("segment {index}: coupling {coupling} outside [0, {c_max}]")]
    CouplingOutOfBounds { index: usize, coupling: f64, c_max: f64 },

    #[error("schedule has no segments")]
    EmptySchedule,

    #[error("negative coupling {0}")]
    NegativeCoupling(f64),

    #[error("sampling interval must be positive, got {0}")]
    InvalidSampleInterval(f64),

    #[error("site {site} out of range 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("a pair needs two distinct sites, got ({0}, {0})")]
    SameSite(usize),

    #[error("mode {mode}: uncertainty product {product} deviates from {expected} (relative {deviation:e})")]
    NotPureSqueezed { mode: usize, product: f64, expected: f64, deviation: f64 },

    #[error("covariance matrix is unphysical: smallest symplectic eigenvalue {0}")]
    Unphysical(f64),

    #[error("imaginary part {0:e} of reconstructed covariance exceeds tolerance")]
    ImaginaryCovariance(f64),

    #[error("negative radicand {0} in simplified symplectic eigenvalues")]
    NegativeRadicand(f64),

    #[error("mean squeezing must be positive, got {0}")]
    NonPositiveSqueezing(f64),

    #[error("state carries no squeezing to synchronize")]
    NoSqueezing,

    #[error("no entanglement peak found within {0} time units")]
    NoPeak(f64),

    #[error("invalid optimizer configuration: {0}")]
    InvalidOptimizer(String),

    #[error("protocol file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
