//! Exact evolution of normal-mode second moments under piecewise-constant
//! coupling, and extraction of squeezing parameters.
//!
//! Each normal mode is a real oscillator carrying `qq = <Q Q†>`,
//! `pp = <P P†>` and the symmetrized `qp = Re <Q P†>`. For constant
//! frequency the Heisenberg solution is a linear map on `(Q, P)`, so the
//! moments transform by congruence and no integration error is incurred.

use std::f64::consts::PI;

use crate::chain::{ChainConfig, ControlSchedule};
use crate::error::{Error, Result};

/// Relative tolerance on the uncertainty product accepted by [`extract_squeeze`].
pub const PURITY_TOLERANCE: f64 = 1e-6;

/// `sinh 2r` below which a mode is treated as unsqueezed.
const ZERO_SQUEEZING: f64 = 1e-12;

/// Second moments of a single normal mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub qq: f64,
    pub qp: f64,
    pub pp: f64,
}

impl Moments {
    /// Thermal state of an oscillator of frequency `omega`, scaled by `f`.
    pub fn thermal(omega: f64, f: f64) -> Self {
        Self { qq: 0.5 * f / omega, qp: 0.0, pp: 0.5 * f * omega }
    }

    /// Moments of a squeezed thermal state with squeezing `r` and angle
    /// `theta` relative to the vacuum of frequency `omega`.
    pub fn squeezed(omega: f64, r: f64, theta: f64, f: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let (em, ep) = ((-2.0 * r).exp(), (2.0 * r).exp());
        Self {
            qq: f * (em * c * c + ep * s * s) / (2.0 * omega),
            pp: f * omega * (ep * c * c + em * s * s) / 2.0,
            qp: f * (2.0 * r).sinh() * s * c,
        }
    }

    /// `qq pp - qp²`, equal to `f²/4` for a squeezed thermal state.
    pub fn uncertainty(&self) -> f64 {
        self.qq * self.pp - self.qp * self.qp
    }

    pub fn energy(&self, omega: f64) -> f64 {
        0.5 * (self.pp + omega * omega * self.qq)
    }

    /// Free evolution for time `dt` at frequency `omega`.
    pub fn evolve(&self, omega: f64, dt: f64) -> Self {
        let (s, c) = (omega * dt).sin_cos();
        let (qq, qp, pp) = (self.qq, self.qp, self.pp);
        Self {
            qq: c * c * qq + 2.0 * c * s / omega * qp + s * s / (omega * omega) * pp,
            qp: -omega * c * s * qq + (c * c - s * s) * qp + s * c / omega * pp,
            pp: omega * omega * s * s * qq - 2.0 * omega * s * c * qp + c * c * pp,
        }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.qq, self.qp, self.pp]
    }
}

/// Second moments of all `N` normal modes at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMoments {
    pub time: f64,
    modes: Vec<Moments>,
}

impl ModeMoments {
    pub fn new(time: f64, modes: Vec<Moments>) -> Self {
        Self { time, modes }
    }

    pub fn modes(&self) -> &[Moments] {
        &self.modes
    }

    /// Moments of mode `s` (1-based).
    pub fn mode(&self, s: usize) -> &Moments {
        &self.modes[s - 1]
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest absolute difference over all moments of all modes.
    pub fn max_abs_diff(&self, other: &ModeMoments) -> f64 {
        self.modes
            .iter()
            .zip(&other.modes)
            .flat_map(|(a, b)| {
                let (a, b) = (a.as_array(), b.as_array());
                (0..3).map(move |i| (a[i] - b[i]).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Squeezing parameters of every mode relative to its instantaneous vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeDecomposition {
    pub omega: Vec<f64>,
    pub r: Vec<f64>,
    /// Angles in `[0, pi)`.
    pub theta: Vec<f64>,
}

impl SqueezeDecomposition {
    pub fn mean_squeezing(&self) -> f64 {
        self.r.iter().sum::<f64>() / self.r.len() as f64
    }
}

/// A sample of a propagated trajectory together with the coupling in effect.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub moments: ModeMoments,
    pub coupling: f64,
}

/// Thermal state of the uncoupled chain at the configured temperature.
pub fn initial_moments(config: &ChainConfig) -> ModeMoments {
    let f = config.thermal_factor();
    let mode = Moments::thermal(config.omega0(), f);
    ModeMoments::new(0.0, vec![mode; config.n_oscillators()])
}

pub fn propagate_segment(m: &ModeMoments, config: &ChainConfig, c: f64, dt: f64) -> ModeMoments {
    debug_assert!(dt >= 0.0, "negative propagation time {dt}");
    let modes = m.modes.iter().enumerate().map(|(i, mode)| mode.evolve(config.mode_frequency(i + 1, c), dt)).collect();
    ModeMoments::new(m.time + dt, modes)
}

/// Propagates through `schedule`, sampling at `m0.time + k * sample_dt`.
///
/// Segment boundaries are followed exactly; each sample is obtained from
/// the state at the start of its segment by one closed-form step. A sample
/// falling on a boundary reports the coupling of the segment starting there.
pub fn propagate_schedule(
    m0: &ModeMoments,
    config: &ChainConfig,
    schedule: &ControlSchedule,
    sample_dt: f64,
) -> Result<Vec<TrajectoryPoint>> {
    if !(sample_dt > 0.0 && sample_dt.is_finite()) {
        return Err(Error::InvalidSampleInterval(sample_dt));
    }
    let segments = schedule.segments();
    let total = schedule.total_duration();
    let n_samples = if segments.is_empty() { 1 } else { (total / sample_dt + 1e-9).floor() as usize + 1 };
    let mut out = Vec::with_capacity(n_samples);

    let mut seg_idx = 0;
    let mut seg_start = 0.0;
    let mut seg_state = m0.clone();
    for k in 0..n_samples {
        let t = k as f64 * sample_dt;
        while seg_idx + 1 < segments.len() && t >= seg_start + segments[seg_idx].duration {
            let seg = segments[seg_idx];
            seg_state = propagate_segment(&seg_state, config, seg.coupling, seg.duration);
            seg_start += seg.duration;
            seg_idx += 1;
        }
        let (coupling, moments) = match segments.get(seg_idx) {
            Some(seg) => {
                let tau = (t - seg_start).max(0.0);
                let mut m = propagate_segment(&seg_state, config, seg.coupling, tau);
                m.time = m0.time + t;
                (seg.coupling, m)
            }
            None => (0.0, m0.clone()),
        };
        out.push(TrajectoryPoint { moments, coupling });
    }
    Ok(out)
}

/// State at the end of `schedule`.
pub fn propagate_to_end(m0: &ModeMoments, config: &ChainConfig, schedule: &ControlSchedule) -> ModeMoments {
    schedule.segments().iter().fold(m0.clone(), |m, seg| propagate_segment(&m, config, seg.coupling, seg.duration))
}

/// Inverts the squeezed-state parametrization mode by mode.
///
/// Moments are first divided by the thermal factor `f(T)`; then
/// `cosh 2r = omega qq + pp/omega` and `sinh 2r (cos 2theta, sin 2theta) =
/// (pp/omega - omega qq, 2 qp)`.
pub fn extract_squeeze(m: &ModeMoments, config: &ChainConfig, c: f64) -> Result<SqueezeDecomposition> {
    let f = config.thermal_factor();
    let expected = 0.25 * f * f;
    let n = m.len();
    let mut out =
        SqueezeDecomposition { omega: Vec::with_capacity(n), r: Vec::with_capacity(n), theta: Vec::with_capacity(n) };
    for (i, mode) in m.modes.iter().enumerate() {
        let product = mode.uncertainty();
        let deviation = (product - expected).abs() / expected;
        if !(deviation <= PURITY_TOLERANCE) {
            return Err(Error::NotPureSqueezed { mode: i + 1, product, expected, deviation });
        }
        let w = config.mode_frequency(i + 1, c);
        let x = (mode.pp / w - w * mode.qq) / f;
        let y = 2.0 * mode.qp / f;
        let sinh2r = x.hypot(y);
        let (r, theta) = if sinh2r <= ZERO_SQUEEZING {
            (0.0, 0.0)
        } else {
            let th = (0.5 * y.atan2(x)).rem_euclid(PI);
            (0.5 * sinh2r.asinh(), if th >= PI { 0.0 } else { th })
        };
        out.omega.push(w);
        out.r.push(r);
        out.theta.push(theta);
    }
    Ok(out)
}
