//! Chain parameters, coupling schedules and the normal-mode dispersion relation.
//!
//! Normal modes are indexed `s = 1..=N`; the zero mode (no coupling
//! dependence) is `s = N`. Vectors indexed by mode store mode `s` at `s - 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings above this fraction of `omega0²` trigger a weak-coupling warning.
pub const WEAK_COUPLING_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    n_oscillators: usize,
    omega0: f64,
    temperature: f64,
}

impl ChainConfig {
    pub fn new(n_oscillators: usize, omega0: f64, temperature: f64) -> Result<Self> {
        if n_oscillators < 4 || !n_oscillators.is_multiple_of(2) {
            return Err(Error::InvalidChainSize(n_oscillators));
        }
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::InvalidFrequency(omega0));
        }
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidTemperature(temperature));
        }
        Ok(Self { n_oscillators, omega0, temperature })
    }

    pub fn n_oscillators(&self) -> usize {
        self.n_oscillators
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Same chain at another temperature.
    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.n_oscillators, self.omega0, temperature)
    }

    /// `coth(omega0 / 2T)`, the scale of the initial thermal covariance.
    pub fn thermal_factor(&self) -> f64 {
        crate::thermo::thermal_factor(self.temperature, self.omega0)
    }

    /// Ground-state energy `N omega0 / 2`.
    pub fn ground_energy(&self) -> f64 {
        0.5 * self.n_oscillators as f64 * self.omega0
    }

    /// The site opposite to `n` on the ring (1-based).
    pub fn opposite_site(&self, n: usize) -> usize {
        (n - 1 + self.n_oscillators / 2) % self.n_oscillators + 1
    }

    /// `sin²(pi s / N)`, the coupling weight of mode `s`.
    ///
    /// Evaluated on `min(s, N - s)` so that degenerate modes share the
    /// exact same floating-point value.
    pub fn mode_weight(&self, s: usize) -> f64 {
        let n = self.n_oscillators;
        let s = s % n;
        let k = s.min(n - s);
        if k == 0 {
            return 0.0;
        }
        let x = (PI * k as f64 / n as f64).sin();
        x * x
    }

    /// `omega_s(c) = sqrt(omega0² + 4 c sin²(pi s / N))`.
    pub fn mode_frequency(&self, s: usize, c: f64) -> f64 {
        (self.omega0 * self.omega0 + 4.0 * c * self.mode_weight(s)).sqrt()
    }

    /// `d omega_s / dc`.
    pub fn mode_frequency_slope(&self, s: usize, c: f64) -> f64 {
        2.0 * self.mode_weight(s) / self.mode_frequency(s, c)
    }

    /// Frequencies of all modes `s = 1..=N` at coupling `c`.
    pub fn mode_frequencies(&self, c: f64) -> Vec<f64> {
        (1..=self.n_oscillators).map(|s| self.mode_frequency(s, c)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub coupling: f64,
}

impl Segment {
    pub fn new(duration: f64, coupling: f64) -> Self {
        Self { duration, coupling }
    }
}

/// Piecewise-constant coupling protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    segments: Vec<Segment>,
    c_max: f64,
}

impl ControlSchedule {
    /// Checked constructor. Rejects empty schedules, non-positive durations
    /// and couplings outside `[0, c_max]`.
    pub fn new(segments: Vec<Segment>, c_max: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptySchedule);
        }
        let mut schedule = Self::empty(c_max)?;
        for seg in segments {
            schedule.push(seg)?;
        }
        Ok(schedule)
    }

    /// A schedule with no segments yet, for incremental construction.
    pub fn empty(c_max: f64) -> Result<Self> {
        if !(c_max >= 0.0 && c_max.is_finite()) {
            return Err(Error::InvalidCouplingBound(c_max));
        }
        Ok(Self { segments: Vec::new(), c_max })
    }

    /// `M` equal-duration segments spanning `horizon`.
    pub fn uniform(couplings: &[f64], horizon: f64, c_max: f64) -> Result<Self> {
        let mut schedule = Self::empty(c_max)?;
        if couplings.is_empty() {
            return Ok(schedule);
        }
        let dt = horizon / couplings.len() as f64;
        for &c in couplings {
            schedule.push(Segment::new(dt, c))?;
        }
        Ok(schedule)
    }

    pub fn push(&mut self, seg: Segment) -> Result<()> {
        let index = self.segments.len();
        if !(seg.duration > 0.0 && seg.duration.is_finite()) {
            return Err(Error::InvalidDuration { index, duration: seg.duration });
        }
        if !(seg.coupling >= 0.0 && seg.coupling <= self.c_max) {
            return Err(Error::CouplingOutOfBounds { index, coupling: seg.coupling, c_max: self.c_max });
        }
        self.segments.push(seg);
        Ok(())
    }

    pub fn extend(&mut self, other: &ControlSchedule) -> Result<()> {
        for &seg in &other.segments {
            self.push(seg)?;
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Coupling in effect at time `t`; right-continuous at segment
    /// boundaries, and the last segment's value at or beyond the end.
    pub fn coupling_at(&self, t: f64) -> f64 {
        let mut start = 0.0;
        for seg in &self.segments {
            let end = start + seg.duration;
            if t < end {
                return seg.coupling;
            }
            start = end;
        }
        self.segments.last().map_or(0.0, |s| s.coupling)
    }

    pub fn couplings(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.coupling).collect()
    }
}

/// Soft diagnostics for a configuration that is valid but outside the
/// regime the entanglement analysis assumes.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// `c_max / omega0²` is not small.
    WeakCoupling { ratio: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::WeakCoupling { ratio } => {
                write!(f, "c_max/omega0^2 = {ratio} is not small; optimal-angle analysis assumes weak coupling")
            }
        }
    }
}

/// Unvalidated chain and protocol parameters, as read from a protocol file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSetup {
    pub omega0: f64,
    pub n_oscillators: usize,
    pub temperature: f64,
    pub c_max: f64,
    pub segments: Vec<Segment>,
}

impl ChainSetup {
    pub fn from_parts(config: &ChainConfig, schedule: &ControlSchedule) -> Self {
        Self {
            omega0: config.omega0(),
            n_oscillators: config.n_oscillators(),
            temperature: config.temperature(),
            c_max: schedule.c_max(),
            segments: schedule.segments().to_vec(),
        }
    }

    /// Hard-checks every parameter and returns soft warnings.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        let (config, schedule) = self.build()?;
        Ok(validate(&config, &schedule))
    }

    pub fn build(&self) -> Result<(ChainConfig, ControlSchedule)> {
        let config = ChainConfig::new(self.n_oscillators, self.omega0, self.temperature)?;
        let schedule = ControlSchedule::new(self.segments.clone(), self.c_max)?;
        Ok((config, schedule))
    }
}

/// Soft diagnostics for an already-constructed configuration.
pub fn validate(config: &ChainConfig, schedule: &ControlSchedule) -> Vec<Warning> {
    let mut warnings = Vec::new();
    let ratio = schedule.c_max() / (config.omega0() * config.omega0());
    if ratio >= WEAK_COUPLING_RATIO {
        warnings.push(Warning::WeakCoupling { ratio });
    }
    warnings
}
