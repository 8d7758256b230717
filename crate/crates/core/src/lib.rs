//! Exact Gaussian dynamics of a periodic chain of harmonic oscillators with a
//! time-dependent nearest-neighbour coupling `c(t)`.
//!
//! The state is carried as per-normal-mode second moments, which is all a
//! zero-mean Gaussian state needs. On top of that the crate provides:
//!
//! - [`chain`]: chain parameters, coupling schedules and the dispersion relation.
//! - [`dynamics`]: closed-form propagation of mode moments and squeezing extraction.
//! - [`entanglement`]: two-site covariance reconstruction and logarithmic negativity.
//! - [`thermo`]: dissipated work, energy bookkeeping and thermal factors.
//! - [`optimizer`]: projected steepest descent on the coupling protocol.
//! - [`protocol`]: the protocol file format.
//! - [`oracle`]: brute-force Runge-Kutta integrators used to cross-check the above.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod optimizer;
pub mod oracle;
pub mod protocol;
pub mod thermo;

pub use chain::{ChainConfig, ChainSetup, ControlSchedule, Segment, Warning};
pub use dynamics::{ModeMoments, Moments, SqueezeDecomposition, TrajectoryPoint};
pub use entanglement::{PairCovariance, ThermalScaling, Validity};
pub use error::{Error, Result};
pub use optimizer::{GradientMode, OptimizationResult, OptimizerConfig, Status};
pub use thermo::WorkReport;
