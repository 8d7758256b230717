//! Coupling protocols that maximize opposite-pair entanglement.
//!
//! The control is piecewise constant. The squeezing stage minimizes
//! `J = [(2/N) sum_odd e^{-2 r_s}] [(2/N) sum_even e^{-2 r_s}]` at the end of
//! the stage by projected steepest descent; a hold at constant coupling
//! then lets the mode angles drift into alignment, and a final
//! zero-coupling segment freezes the entanglement reached.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, ControlSchedule, Segment};
use crate::dynamics::{self, extract_squeeze, initial_moments, propagate_segment, ModeMoments, SqueezeDecomposition};
use crate::entanglement::{self, Validity};
use crate::error::{Error, Result};
use crate::thermo::{self, WorkReport};

/// Below this `sinh 2r` the terminal cost is not differentiable and the
/// one-sided derivative matching the finite-difference stencil is used.
const KINK_THRESHOLD: f64 = 1e-10;

/// Entanglement at or below this level does not count as a peak.
const MIN_PEAK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    #[default]
    FiniteDifference,
    Adjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Number of equal-duration control segments in the squeezing stage.
    pub n_segments: usize,
    /// Duration of the squeezing stage.
    pub horizon: f64,
    pub c_max: f64,
    /// Initial trial step of the line search.
    pub step_size: f64,
    pub max_iterations: usize,
    /// Stop when the relative cost decrease falls below this.
    pub convergence_tol: f64,
    pub gradient_mode: GradientMode,
    pub fd_epsilon: f64,
    /// Coupling held while the angles synchronize.
    pub sync_c: f64,
    pub sync_max_time: f64,
    /// Duration of the closing zero-coupling segment.
    pub freeze_time: f64,
    /// Angle tolerance (rad) for flagging the peak as synchronized.
    pub peak_tol: f64,
    pub sample_dt: f64,
    /// Extra random starting protocols besides the constant `c_max / 2`.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_segments: 40,
            horizon: 20.0,
            c_max: 0.05,
            step_size: 1.0,
            max_iterations: 200,
            convergence_tol: 1e-10,
            gradient_mode: GradientMode::FiniteDifference,
            fd_epsilon: 1e-6,
            sync_c: 0.05,
            sync_max_time: 200.0,
            freeze_time: 20.0,
            peak_tol: 0.05,
            sample_dt: 0.05,
            restarts: 0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidOptimizer(msg));
        if !(self.c_max > 0.0 && self.c_max.is_finite()) {
            return bad(format!("c_max must be positive, got {}", self.c_max));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be non-negative, got {}", self.horizon));
        }
        if self.horizon > 0.0 && self.n_segments == 0 {
            return bad("n_segments must be at least 1".into());
        }
        if !(0.0..=self.c_max).contains(&self.sync_c) {
            return bad(format!("sync_c {} outside [0, {}]", self.sync_c, self.c_max));
        }
        if !(self.fd_epsilon > 0.0 && self.fd_epsilon < self.c_max / 10.0) {
            return bad(format!("fd_epsilon {} outside (0, c_max/10)", self.fd_epsilon));
        }
        if !(self.step_size > 0.0) {
            return bad(format!("step_size must be positive, got {}", self.step_size));
        }
        if !(self.sample_dt > 0.0) {
            return bad(format!("sample_dt must be positive, got {}", self.sample_dt));
        }
        if !(self.sync_max_time >= 0.0) || !(self.freeze_time > 0.0) {
            return bad("sync_max_time must be non-negative and freeze_time positive".into());
        }
        Ok(())
    }

    /// The default starting protocol, constant `c_max / 2`.
    pub fn initial_protocol(&self) -> Result<ControlSchedule> {
        let n = if self.horizon > 0.0 { self.n_segments } else { 0 };
        ControlSchedule::uniform(&vec![0.5 * self.c_max; n], self.horizon, self.c_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIterations,
    LineSearchStalled,
}

impl Status {
    pub fn is_converged(self) -> bool {
        self == Status::Converged
    }
}

/// Result of the hold-and-freeze phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncOutcome {
    /// Hold segment (omitted when the peak is at the start) plus freeze segment.
    pub segments: ControlSchedule,
    pub hold_time: f64,
    pub peak_log_negativity: f64,
    /// State at the peak, i.e. at the start of the freeze.
    pub peak_moments: ModeMoments,
    /// Bound from the squeezing relative to the hold frequencies.
    pub bound_at_peak: f64,
    pub validity_at_peak: Validity,
    /// Bound from the squeezing relative to `omega0`, which is what holds
    /// once the coupling is switched off.
    pub frozen_bound: f64,
    pub angle_mismatch: f64,
    pub synchronized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Squeeze, hold and freeze segments.
    pub protocol: ControlSchedule,
    pub squeeze_stage: ControlSchedule,
    pub status: Status,
    pub cost_history: Vec<f64>,
    pub iterations: usize,
    /// Squeezing at the end of the squeezing stage, relative to the
    /// frequencies of its last segment.
    pub final_squeezing: SqueezeDecomposition,
    pub work: WorkReport,
    pub energy_after_squeeze: f64,
    pub peak_log_negativity: f64,
    /// Absolute time of the peak (start of the freeze).
    pub peak_time: f64,
    pub bound_at_peak: f64,
    pub validity_at_peak: Validity,
    pub frozen_bound: f64,
    pub angle_mismatch_at_peak: f64,
    pub synchronized: bool,
}

impl OptimizationResult {
    pub fn final_cost(&self) -> f64 {
        *self.cost_history.last().unwrap_or(&1.0)
    }
}

fn last_coupling(schedule: &ControlSchedule) -> f64 {
    schedule.segments().last().map_or(0.0, |s| s.coupling)
}

/// Per-mode terminal quantities in the `f(T)`-rescaled frame:
/// `X = cosh 2r`, `(u, v) = sinh 2r (cos 2theta, sin 2theta)`.
struct Terminal {
    x: f64,
    u: f64,
    v: f64,
}

impl Terminal {
    fn new(m: &dynamics::Moments, w: f64, f: f64) -> Self {
        Self { x: (w * m.qq + m.pp / w) / f, u: (m.pp / w - w * m.qq) / f, v: 2.0 * m.qp / f }
    }

    fn rho(&self) -> f64 {
        self.u.hypot(self.v)
    }

    /// `e^{-2r} = 1 / (cosh 2r + sinh 2r)`.
    fn g(&self) -> f64 {
        1.0 / (self.x + self.rho())
    }
}

fn mode_sums(g: &[f64]) -> (f64, f64) {
    let n = g.len() as f64;
    let (mut odd, mut even) = (0.0, 0.0);
    for (i, &x) in g.iter().enumerate() {
        if (i + 1) % 2 == 1 {
            odd += x;
        } else {
            even += x;
        }
    }
    (2.0 / n * odd, 2.0 / n * even)
}

fn cost_of_state(m: &ModeMoments, config: &ChainConfig, c_last: f64) -> f64 {
    let f = config.thermal_factor();
    let g: Vec<f64> = m
        .modes()
        .iter()
        .enumerate()
        .map(|(i, mode)| Terminal::new(mode, config.mode_frequency(i + 1, c_last), f).g())
        .collect();
    let (odd, even) = mode_sums(&g);
    odd * even
}

/// `J` at the end of `protocol`, starting from the thermal uncoupled chain.
pub fn cost(protocol: &ControlSchedule, config: &ChainConfig) -> f64 {
    let end = dynamics::propagate_to_end(&initial_moments(config), config, protocol);
    cost_of_state(&end, config, last_coupling(protocol))
}

fn with_coupling(protocol: &ControlSchedule, k: usize, c: f64) -> ControlSchedule {
    let mut segs = protocol.segments().to_vec();
    segs[k].coupling = c;
    ControlSchedule::new(segs, protocol.c_max()).expect("perturbed coupling within bounds")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stencil {
    Forward,
    Backward,
    Central,
}

fn stencil(c: f64, eps: f64, c_max: f64) -> Stencil {
    if c - eps < 0.0 {
        Stencil::Forward
    } else if c + eps > c_max {
        Stencil::Backward
    } else {
        Stencil::Central
    }
}

/// `dJ/dc_k` for every segment of `protocol`.
pub fn gradient(protocol: &ControlSchedule, config: &ChainConfig, opt: &OptimizerConfig) -> Vec<f64> {
    match opt.gradient_mode {
        GradientMode::FiniteDifference => fd_gradient(protocol, config, opt.fd_epsilon),
        GradientMode::Adjoint => adjoint_gradient(protocol, config, opt.fd_epsilon),
    }
}

/// Central differences, one-sided within `eps` of a bound.
pub fn fd_gradient(protocol: &ControlSchedule, config: &ChainConfig, eps: f64) -> Vec<f64> {
    let c_max = protocol.c_max();
    protocol
        .segments()
        .iter()
        .enumerate()
        .map(|(k, seg)| {
            let c = seg.coupling;
            let (lo, hi) = match stencil(c, eps, c_max) {
                Stencil::Forward => (c, c + eps),
                Stencil::Backward => (c - eps, c),
                Stencil::Central => (c - eps, c + eps),
            };
            let j_hi = cost(&with_coupling(protocol, k, hi), config);
            let j_lo = cost(&with_coupling(protocol, k, lo), config);
            (j_hi - j_lo) / (hi - lo)
        })
        .collect()
}

/// Exact one-segment flow `(Q, P) -> M (Q, P)` at frequency `w`.
fn flow(w: f64, dt: f64) -> Matrix2<f64> {
    let (s, c) = (w * dt).sin_cos();
    Matrix2::new(c, s / w, -w * s, c)
}

fn flow_dw(w: f64, dt: f64) -> Matrix2<f64> {
    let (s, c) = (w * dt).sin_cos();
    Matrix2::new(-dt * s, dt * c / w - s / (w * w), -s - w * dt * c, -dt * s)
}

fn sigma(m: &dynamics::Moments) -> Matrix2<f64> {
    Matrix2::new(m.qq, m.qp, m.qp, m.pp)
}

/// Sensitivities `d(l . y_end)/dc_k` of a linear functional of one mode's
/// final moments `y = (qq, qp, pp)`, by a backward costate sweep through
/// the exact segment flows. `states[k]` is the mode state entering segment `k`.
fn costate_sweep(
    states: &[dynamics::Moments],
    freqs: &[f64],
    slopes: &[f64],
    durations: &[f64],
    l: [f64; 3],
) -> Vec<f64> {
    let m = durations.len();
    let mut lambda = Matrix2::new(l[0], 0.5 * l[1], 0.5 * l[1], l[2]);
    let mut sens = vec![0.0; m];
    for k in (0..m).rev() {
        let flow_k = flow(freqs[k], durations[k]);
        let d_flow = flow_dw(freqs[k], durations[k]);
        let x = d_flow * sigma(&states[k]) * flow_k.transpose();
        sens[k] = 2.0 * (lambda * x).trace() * slopes[k];
        lambda = flow_k.transpose() * lambda * flow_k;
    }
    sens
}

/// Adjoint-state gradient. Where a mode's final squeezing vanishes the cost
/// has a kink; there the one-sided derivative matching the
/// finite-difference stencil for step `eps` is returned.
pub fn adjoint_gradient(protocol: &ControlSchedule, config: &ChainConfig, eps: f64) -> Vec<f64> {
    let segs = protocol.segments();
    let m = segs.len();
    let n = config.n_oscillators();
    if m == 0 {
        return Vec::new();
    }
    let f = config.thermal_factor();
    let durations: Vec<f64> = segs.iter().map(|s| s.duration).collect();
    let c_last = segs[m - 1].coupling;

    // Forward pass, keeping the state entering every segment.
    let mut trajectory = Vec::with_capacity(m + 1);
    trajectory.push(initial_moments(config));
    for seg in segs {
        let next = propagate_segment(trajectory.last().unwrap(), config, seg.coupling, seg.duration);
        trajectory.push(next);
    }
    let end = &trajectory[m];

    let terminals: Vec<Terminal> =
        (0..n).map(|i| Terminal::new(end.mode(i + 1), config.mode_frequency(i + 1, c_last), f)).collect();
    let g: Vec<f64> = terminals.iter().map(Terminal::g).collect();
    let (odd, even) = mode_sums(&g);
    let norm = 2.0 / n as f64;

    let stencils: Vec<Stencil> = segs.iter().map(|s| stencil(s.coupling, eps, protocol.c_max())).collect();
    let mut grad = vec![0.0; m];
    for (i, term) in terminals.iter().enumerate() {
        let s = i + 1;
        let dj_dg = if s % 2 == 1 { norm * even } else { norm * odd };
        let w_end = config.mode_frequency(s, c_last);
        let slope_end = config.mode_frequency_slope(s, c_last);
        let freqs: Vec<f64> = segs.iter().map(|seg| config.mode_frequency(s, seg.coupling)).collect();
        let slopes: Vec<f64> = segs.iter().map(|seg| config.mode_frequency_slope(s, seg.coupling)).collect();
        let states: Vec<dynamics::Moments> = trajectory[..m].iter().map(|t| *t.mode(s)).collect();
        let mode_end = end.mode(s);

        let dx_dy = [w_end / f, 0.0, 1.0 / (w_end * f)];
        let du_dy = [-w_end / f, 0.0, 1.0 / (w_end * f)];
        let dv_dy = [0.0, 2.0 / f, 0.0];
        let dx_dw = (mode_end.qq - mode_end.pp / (w_end * w_end)) / f;
        let du_dw = -(mode_end.qq + mode_end.pp / (w_end * w_end)) / f;
        let gsq = g[i] * g[i];
        let rho = term.rho();

        if rho > KINK_THRESHOLD {
            let (eu, ev) = (term.u / rho, term.v / rho);
            let l: [f64; 3] = std::array::from_fn(|j| -gsq * (dx_dy[j] + eu * du_dy[j] + ev * dv_dy[j]));
            let sens = costate_sweep(&states, &freqs, &slopes, &durations, l);
            for (gk, sk) in grad.iter_mut().zip(&sens) {
                *gk += dj_dg * sk;
            }
            grad[m - 1] += dj_dg * (-gsq * (dx_dw + eu * du_dw)) * slope_end;
        } else {
            let mut dx = costate_sweep(&states, &freqs, &slopes, &durations, dx_dy);
            let mut du = costate_sweep(&states, &freqs, &slopes, &durations, du_dy);
            let dv = costate_sweep(&states, &freqs, &slopes, &durations, dv_dy);
            dx[m - 1] += dx_dw * slope_end;
            du[m - 1] += du_dw * slope_end;
            for k in 0..m {
                let dz = du[k].hypot(dv[k]);
                let one_sided = match stencils[k] {
                    Stencil::Forward => dx[k] + dz,
                    Stencil::Backward => dx[k] - dz,
                    Stencil::Central => dx[k],
                };
                grad[k] += dj_dg * (-gsq * one_sided);
            }
        }
    }
    grad
}

struct Descent {
    protocol: ControlSchedule,
    history: Vec<f64>,
    status: Status,
    iterations: usize,
}

fn project(c: f64, c_max: f64) -> f64 {
    c.clamp(0.0, c_max)
}

/// Projected steepest descent with a backtracking (halving) line search.
fn descend(start: &ControlSchedule, config: &ChainConfig, opt: &OptimizerConfig) -> Descent {
    let c_max = start.c_max();
    let mut protocol = start.clone();
    let mut j = cost(&protocol, config);
    let mut history = vec![j];
    let mut step = opt.step_size;
    let max_step = opt.step_size * 1e6;
    let min_step = opt.step_size * 1e-20;

    for iter in 0..opt.max_iterations {
        let grad = gradient(&protocol, config, opt);
        let cs = protocol.couplings();
        let projected =
            cs.iter().zip(&grad).map(
                |(&c, &g)| {
                    if (c <= 0.0 && g > 0.0) || (c >= c_max && g < 0.0) {
                        0.0
                    } else {
                        g.abs()
                    }
                },
            );
        let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if projected.fold(0.0, f64::max) <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Descent { protocol, history, status: Status::Converged, iterations: iter };
        }

        let mut accepted = None;
        while step >= min_step {
            let trial: Vec<f64> = cs.iter().zip(&grad).map(|(&c, &g)| project(c - step * g, c_max)).collect();
            let candidate = ControlSchedule::new(
                protocol.segments().iter().zip(&trial).map(|(s, &c)| Segment::new(s.duration, c)).collect(),
                c_max,
            )
            .expect("projected protocol within bounds");
            let j_new = cost(&candidate, config);
            if j_new < j {
                accepted = Some((candidate, j_new));
                break;
            }
            step *= 0.5;
        }
        let Some((candidate, j_new)) = accepted else {
            return Descent { protocol, history, status: Status::LineSearchStalled, iterations: iter };
        };
        let rel = (j - j_new) / j;
        protocol = candidate;
        j = j_new;
        history.push(j);
        step = (2.0 * step).min(max_step);
        if rel < opt.convergence_tol {
            return Descent { protocol, history, status: Status::Converged, iterations: iter + 1 };
        }
    }
    Descent { protocol, history, status: Status::MaxIterations, iterations: opt.max_iterations }
}

/// Opposite-pair logarithmic negativity of a mode state.
fn opposite_negativity(m: &ModeMoments, config: &ChainConfig) -> Result<f64> {
    entanglement::log_negativity(&entanglement::opposite_pair_covariance(m, config)?)
}

/// Holds `sync_c` after the squeezing stage, finds the largest
/// opposite-pair entanglement within `sync_max_time`, and returns the hold
/// up to that instant followed by a zero-coupling freeze.
///
/// `c_in` is the coupling in effect when `state` is handed over; squeezing
/// is measured relative to it for the precondition check.
pub fn synchronize_and_freeze(
    state: &ModeMoments,
    c_in: f64,
    config: &ChainConfig,
    opt: &OptimizerConfig,
) -> Result<SyncOutcome> {
    let incoming = extract_squeeze(state, config, c_in)?;
    if incoming.r.iter().sum::<f64>() <= 1e-9 {
        return Err(Error::NoSqueezing);
    }
    let n_samples = (opt.sync_max_time / opt.sample_dt + 1e-9).floor() as usize;
    let mut best: Option<(usize, f64, ModeMoments)> = None;
    for k in 0..=n_samples {
        let tau = k as f64 * opt.sample_dt;
        let m = propagate_segment(state, config, opt.sync_c, tau);
        let e = opposite_negativity(&m, config)?;
        if best.as_ref().is_none_or(|(_, b, _)| e > *b) {
            best = Some((k, e, m));
        }
    }
    let (k, peak, peak_moments) = best.expect("at least one sample");
    if peak <= MIN_PEAK {
        return Err(Error::NoPeak(opt.sync_max_time));
    }
    let hold_time = k as f64 * opt.sample_dt;

    let mut segments = ControlSchedule::empty(opt.c_max)?;
    if hold_time > 0.0 {
        segments.push(Segment::new(hold_time, opt.sync_c))?;
    }
    segments.push(Segment::new(opt.freeze_time, 0.0))?;

    let at_peak = extract_squeeze(&peak_moments, config, opt.sync_c)?;
    let frozen = extract_squeeze(&peak_moments, config, 0.0)?;
    let mismatch = entanglement::angle_mismatch(&at_peak, 1e-3);
    Ok(SyncOutcome {
        segments,
        hold_time,
        peak_log_negativity: peak,
        bound_at_peak: entanglement::max_log_negativity(&at_peak.r, config),
        validity_at_peak: entanglement::validity_check(opt.sync_c, &at_peak.r, config),
        frozen_bound: entanglement::max_log_negativity(&frozen.r, config),
        angle_mismatch: mismatch,
        synchronized: mismatch <= opt.peak_tol,
        peak_moments,
    })
}

/// Full optimization: descent on the squeezing stage (plus any random
/// restarts), then hold and freeze.
pub fn optimize(initial: &ControlSchedule, config: &ChainConfig, opt: &OptimizerConfig) -> Result<OptimizationResult> {
    opt.validate()?;
    let mut best = descend(initial, config, opt);
    if !initial.is_empty() && opt.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
        let durations: Vec<f64> = initial.segments().iter().map(|s| s.duration).collect();
        for _ in 0..opt.restarts {
            let segs = durations.iter().map(|&d| Segment::new(d, rng.gen_range(0.0..=initial.c_max()))).collect();
            let run = descend(&ControlSchedule::new(segs, initial.c_max())?, config, opt);
            if run.history.last() < best.history.last() {
                best = run;
            }
        }
    }

    let squeeze_stage = best.protocol;
    let c_in = last_coupling(&squeeze_stage);
    let end = dynamics::propagate_to_end(&initial_moments(config), config, &squeeze_stage);
    let final_squeezing = extract_squeeze(&end, config, c_in)?;
    let work = thermo::total_dissipated_work(&final_squeezing, config);
    let energy_after_squeeze = thermo::chain_energy(&end, config, c_in);
    let t1 = squeeze_stage.total_duration();

    let mut protocol = squeeze_stage.clone();
    let (peak, peak_time, bound, validity, frozen_bound, mismatch, synchronized) =
        match synchronize_and_freeze(&end, c_in, config, opt) {
            Ok(sync) => {
                protocol.extend(&sync.segments)?;
                (
                    sync.peak_log_negativity,
                    t1 + sync.hold_time,
                    sync.bound_at_peak,
                    sync.validity_at_peak,
                    sync.frozen_bound,
                    sync.angle_mismatch,
                    sync.synchronized,
                )
            }
            Err(Error::NoSqueezing) => {
                // Nothing to synchronize: close with the freeze alone.
                protocol.push(Segment::new(opt.freeze_time, 0.0))?;
                let e = opposite_negativity(&end, config)?;
                let v = entanglement::validity_check(c_in, &final_squeezing.r, config);
                let b = entanglement::max_log_negativity(&final_squeezing.r, config);
                (e, t1, b, v, b, 0.0, false)
            }
            Err(e) => return Err(e),
        };

    Ok(OptimizationResult {
        protocol,
        squeeze_stage,
        status: best.status,
        cost_history: best.history,
        iterations: best.iterations,
        final_squeezing,
        work,
        energy_after_squeeze,
        peak_log_negativity: peak,
        peak_time,
        bound_at_peak: bound,
        validity_at_peak: validity,
        frozen_bound,
        angle_mismatch_at_peak: mismatch,
        synchronized,
    })
}

/// `E_N(t)` of the opposite pair `(1, 1 + N/2)` after a sudden switch to `c_value` at `t = 0`.
pub fn sudden_switch_baseline(
    config: &ChainConfig,
    c_value: f64,
    horizon: f64,
    sample_dt: f64,
) -> Result<Vec<(f64, f64)>> {
    if c_value < 0.0 {
        return Err(Error::NegativeCoupling(c_value));
    }
    let schedule = ControlSchedule::new(vec![Segment::new(horizon, c_value)], c_value)?;
    dynamics::propagate_schedule(&initial_moments(config), config, &schedule, sample_dt)?
        .iter()
        .map(|p| Ok((p.moments.time, opposite_negativity(&p.moments, config)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn chain(n: usize) -> ChainConfig {
        ChainConfig::new(n, 1.0, 0.0).unwrap()
    }

    #[test]
    fn cost_of_trivial_protocols() {
        let cfg = chain(8);
        let zero = ControlSchedule::uniform(&[0.0; 10], 20.0, 0.05).unwrap();
        assert_relative_eq!(cost(&zero, &cfg), 1.0, epsilon = 1e-14);
        assert_eq!(cost(&ControlSchedule::empty(0.05).unwrap(), &cfg), 1.0);
    }

    #[test]
    fn cost_matches_bound_argument() {
        let cfg = chain(8);
        let p = ControlSchedule::uniform(&[0.05, 0.0, 0.05, 0.0, 0.02], 8.0, 0.05).unwrap();
        let end = dynamics::propagate_to_end(&initial_moments(&cfg), &cfg, &p);
        let d = extract_squeeze(&end, &cfg, 0.02).unwrap();
        assert_relative_eq!(cost(&p, &cfg), entanglement::bound_argument(&d.r), epsilon = 1e-13);
    }

    #[test]
    fn uniform_squeezing_cost() {
        // J for r_s = 0.5 everywhere is e^{-2}.
        assert_relative_eq!(entanglement::bound_argument(&[0.5; 8]), (-2f64).exp(), epsilon = 1e-15);
        assert_relative_eq!((-2f64).exp(), 0.135335, epsilon = 1e-6);
    }

    #[test]
    fn single_segment_fd_is_a_difference_quotient() {
        let cfg = chain(8);
        let p = ControlSchedule::uniform(&[0.03], 5.0, 0.05).unwrap();
        let eps = 1e-6;
        let expected = (cost(&with_coupling(&p, 0, 0.03 + eps), &cfg) - cost(&with_coupling(&p, 0, 0.03 - eps), &cfg))
            / ((0.03 + eps) - (0.03 - eps));
        assert_eq!(fd_gradient(&p, &cfg, eps), vec![expected]);
    }

    #[test]
    fn adjoint_at_zero_protocol() {
        let cfg = chain(8);
        let p = ControlSchedule::uniform(&[0.0; 6], 6.0, 0.05).unwrap();
        let fd = fd_gradient(&p, &cfg, 1e-7);
        let adj = adjoint_gradient(&p, &cfg, 1e-7);
        for (a, b) in fd.iter().zip(&adj) {
            assert!(a.is_finite() && b.is_finite());
            assert!((a - b).abs() <= 1e-4 * a.abs().max(b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn zero_squeezing_rejected_by_sync() {
        let cfg = chain(8);
        let opt = OptimizerConfig::default();
        let r = synchronize_and_freeze(&initial_moments(&cfg), 0.0, &cfg, &opt);
        assert!(matches!(r, Err(Error::NoSqueezing)));
    }

    #[test]
    fn zero_horizon_is_sync_only() {
        let cfg = chain(8);
        let opt = OptimizerConfig { horizon: 0.0, ..Default::default() };
        let res = optimize(&opt.initial_protocol().unwrap(), &cfg, &opt).unwrap();
        assert!(res.squeeze_stage.is_empty());
        assert_eq!(res.peak_log_negativity, 0.0);
        assert_eq!(res.protocol.segments(), &[Segment::new(opt.freeze_time, 0.0)]);
    }

    #[test]
    fn one_iteration_decreases_cost() {
        let cfg = chain(8);
        let opt = OptimizerConfig { max_iterations: 1, horizon: 10.0, n_segments: 20, ..Default::default() };
        let res = optimize(&opt.initial_protocol().unwrap(), &cfg, &opt).unwrap();
        assert_eq!(res.cost_history.len(), 2);
        assert!(res.cost_history[1] < res.cost_history[0]);
    }

    #[test]
    fn restarts_are_deterministic() {
        let cfg = chain(4);
        let opt = OptimizerConfig { horizon: 6.0, n_segments: 12, restarts: 2, seed: 7, ..Default::default() };
        let a = optimize(&opt.initial_protocol().unwrap(), &cfg, &opt).unwrap();
        let b = optimize(&opt.initial_protocol().unwrap(), &cfg, &opt).unwrap();
        assert_eq!(a.protocol, b.protocol);
        assert_eq!(a.cost_history, b.cost_history);
    }

    #[test]
    fn invalid_configs() {
        let bad = OptimizerConfig { sync_c: 0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { fd_epsilon: 0.01, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(OptimizerConfig::default().validate().is_ok());
    }

    #[test]
    fn sudden_zero_coupling_is_separable() {
        let trace = sudden_switch_baseline(&chain(8), 0.0, 50.0, 0.5).unwrap();
        assert!(trace.iter().all(|&(_, e)| e == 0.0));
    }
}
