//! Brute-force Runge-Kutta integrators used to cross-check the closed-form
//! propagation. Neither shares code with [`crate::dynamics`] beyond the
//! state containers.

use nalgebra::{DMatrix, Matrix4};

use crate::chain::{ChainConfig, ControlSchedule};
use crate::dynamics::{ModeMoments, Moments};
use crate::entanglement::PairCovariance;

/// Default step `1e-3 / omega0`.
pub fn default_step(config: &ChainConfig) -> f64 {
    1e-3 / config.omega0()
}

/// Sample times `k * sample_dt` on `[0, total]` merged with segment
/// boundaries, so that integration never straddles a coupling jump.
fn breakpoints(schedule: &ControlSchedule, sample_dt: f64) -> (Vec<f64>, Vec<f64>) {
    let total = schedule.total_duration();
    let n = (total / sample_dt + 1e-9).floor() as usize;
    let samples: Vec<f64> = (0..=n).map(|k| k as f64 * sample_dt).collect();
    let mut points = samples.clone();
    let mut t = 0.0;
    for seg in schedule.segments() {
        t += seg.duration;
        points.push(t);
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    (points, samples)
}

fn mode_rhs(y: [f64; 3], w2: f64) -> [f64; 3] {
    let [qq, qp, pp] = y;
    [2.0 * qp, pp - w2 * qq, -2.0 * w2 * qp]
}

fn rk4_mode(y: [f64; 3], w2: f64, h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = mode_rhs(y, w2);
    let k2 = mode_rhs(add(y, k1, 0.5 * h), w2);
    let k3 = mode_rhs(add(y, k2, 0.5 * h), w2);
    let k4 = mode_rhs(add(y, k3, h), w2);
    let mut out = y;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates the per-mode moment equations
/// `qq' = 2 qp`, `qp' = pp - w² qq`, `pp' = -2 w² qp`
/// with classical RK4 and returns the state on the grid `k * sample_dt`.
pub fn ode_oracle(
    m0: &ModeMoments,
    config: &ChainConfig,
    schedule: &ControlSchedule,
    dt_step: f64,
    sample_dt: f64,
) -> Vec<ModeMoments> {
    let (points, samples) = breakpoints(schedule, sample_dt);
    let mut state: Vec<[f64; 3]> = m0.modes().iter().map(|m| [m.qq, m.qp, m.pp]).collect();
    let snapshot = |state: &[[f64; 3]], t: f64| {
        ModeMoments::new(m0.time + t, state.iter().map(|y| Moments { qq: y[0], qp: y[1], pp: y[2] }).collect())
    };
    let mut out = Vec::with_capacity(samples.len());
    let mut next_sample = 0;
    let mut t = 0.0;
    for &target in &points {
        if target > t {
            let c = schedule.coupling_at(0.5 * (t + target));
            let steps = ((target - t) / dt_step).ceil().max(1.0) as usize;
            let h = (target - t) / steps as f64;
            for (i, y) in state.iter_mut().enumerate() {
                let w2 = config.omega0().powi(2) + 4.0 * c * config.mode_weight(i + 1);
                for _ in 0..steps {
                    *y = rk4_mode(*y, w2, h);
                }
            }
            t = target;
        }
        while next_sample < samples.len() && (samples[next_sample] - t).abs() < 1e-9 {
            out.push(snapshot(&state, samples[next_sample]));
            next_sample += 1;
        }
    }
    out
}

/// Site-basis covariance oracle: integrates `dG/dt = A G + G A^T` for the
/// full `2N x 2N` covariance with `A = [[0, I], [-K, 0]]` and the ring
/// stiffness matrix `K`. Ordering is `(q_1..q_N, p_1..p_N)`, convention
/// `2 Re <x y>`. Returns the covariance on the grid `k * sample_dt`.
pub fn site_covariance_oracle(
    config: &ChainConfig,
    schedule: &ControlSchedule,
    dt_step: f64,
    sample_dt: f64,
) -> Vec<DMatrix<f64>> {
    let n = config.n_oscillators();
    let w0 = config.omega0();
    let f = config.thermal_factor();
    let mut gamma = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        gamma[(i, i)] = f / w0;
        gamma[(n + i, n + i)] = f * w0;
    }
    let drift = |c: f64| {
        let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            a[(i, n + i)] = 1.0;
            a[(n + i, i)] = -(w0 * w0 + 2.0 * c);
            a[(n + i, (i + 1) % n)] += c;
            a[(n + i, (i + n - 1) % n)] += c;
        }
        a
    };
    let rhs = |a: &DMatrix<f64>, g: &DMatrix<f64>| {
        let ag = a * g;
        let agt = ag.transpose();
        ag + agt
    };

    let (points, samples) = breakpoints(schedule, sample_dt);
    let mut out = Vec::with_capacity(samples.len());
    let mut next_sample = 0;
    let mut t = 0.0;
    for &target in &points {
        if target > t {
            let a = drift(schedule.coupling_at(0.5 * (t + target)));
            let steps = ((target - t) / dt_step).ceil().max(1.0) as usize;
            let h = (target - t) / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(&a, &gamma);
                let k2 = rhs(&a, &(&gamma + &k1 * (0.5 * h)));
                let k3 = rhs(&a, &(&gamma + &k2 * (0.5 * h)));
                let k4 = rhs(&a, &(&gamma + &k3 * h));
                gamma += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            }
            t = target;
        }
        while next_sample < samples.len() && (samples[next_sample] - t).abs() < 1e-9 {
            out.push(gamma.clone());
            next_sample += 1;
        }
    }
    out
}

/// Extracts the `(q_n, p_n, q_m, p_m)` block of a site-basis covariance.
pub fn pair_block(gamma: &DMatrix<f64>, n: usize, m: usize) -> PairCovariance {
    let big_n = gamma.nrows() / 2;
    let idx = [n - 1, big_n + n - 1, m - 1, big_n + m - 1];
    PairCovariance::new(Matrix4::from_fn(|i, j| gamma[(idx[i], idx[j])]), (n, m))
}

/// Symplectic eigenvalues of a two-mode covariance from the invariants
/// `Delta = det A + det B + 2 det C` and `det Gamma`, without an eigen-solve.
pub fn symplectic_eigenvalues_closed_form(gamma: &Matrix4<f64>) -> (f64, f64) {
    let det2 = |i: usize, j: usize| gamma[(i, j)] * gamma[(i + 1, j + 1)] - gamma[(i, j + 1)] * gamma[(i + 1, j)];
    let delta = det2(0, 0) + det2(2, 2) + 2.0 * det2(0, 2);
    let det = gamma.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    (((delta - disc) / 2.0).max(0.0).sqrt(), ((delta + disc) / 2.0).sqrt())
}
