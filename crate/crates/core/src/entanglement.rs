//! Two-site covariance matrices and logarithmic negativity.
//!
//! Covariances use the `Gamma_xy = 2 Re <x y>` convention, in which the
//! vacuum of `omega0 = 1` is the identity and physical states have all
//! symplectic eigenvalues `>= 1`.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};

use crate::chain::ChainConfig;
use crate::dynamics::{ModeMoments, SqueezeDecomposition};
use crate::error::{Error, Result};

/// Symplectic eigenvalues this close to 1 are treated as exactly 1.
pub const PPT_TOLERANCE: f64 = 1e-12;

/// Relative slack on the physicality check `nu >= 1`.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-8;

const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Validity ratio below which the optimal-angle analysis is trusted.
pub const VALIDITY_THRESHOLD: f64 = 0.1;
/// Strict version of [`VALIDITY_THRESHOLD`].
pub const STRICT_VALIDITY_THRESHOLD: f64 = 0.01;

/// Covariance of two oscillators, ordered `(q_n, p_n, q_m, p_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCovariance {
    pub matrix: Matrix4<f64>,
    pub sites: (usize, usize),
}

impl PairCovariance {
    pub fn new(matrix: Matrix4<f64>, sites: (usize, usize)) -> Self {
        Self { matrix, sites }
    }

    /// Same state with the roles of the two sites exchanged.
    pub fn swapped(&self) -> Self {
        let p = [2, 3, 0, 1];
        let matrix = Matrix4::from_fn(|i, j| self.matrix[(p[i], p[j])]);
        Self { matrix, sites: (self.sites.1, self.sites.0) }
    }

    /// Entries `(a, b, c, d)` as used by [`simplified_eigenvalues`].
    pub fn symmetric_entries(&self) -> (f64, f64, f64, f64) {
        let g = &self.matrix;
        (g[(0, 0)], g[(0, 2)], g[(0, 1)], g[(0, 3)])
    }
}

/// How the thermal factor enters the entanglement bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalScaling {
    /// Each symplectic eigenvalue scales by `f(T)`, so the product of the
    /// two mode sums is multiplied by `f²`.
    #[default]
    Squared,
    /// Product multiplied by `f`.
    Linear,
}

/// Reconstructs the covariance of sites `n` and `m_site` (1-based).
pub fn pair_covariance(m: &ModeMoments, config: &ChainConfig, n: usize, m_site: usize) -> Result<PairCovariance> {
    let big_n = config.n_oscillators();
    for site in [n, m_site] {
        if site == 0 || site > big_n {
            return Err(Error::SiteOutOfRange { site, n: big_n });
        }
    }
    if n == m_site {
        return Err(Error::SameSite(n));
    }
    let sep = (n + big_n - m_site) % big_n;
    let norm = 2.0 / big_n as f64;

    let (mut qq0, mut pp0, mut qp0) = (0.0, 0.0, 0.0);
    let (mut qq1, mut pp1, mut qp1) = (0.0, 0.0, 0.0);
    let mut imag = 0.0f64;
    let (mut iq, mut ip, mut ix) = (0.0, 0.0, 0.0);
    for (i, mode) in m.modes().iter().enumerate() {
        let s = i + 1;
        let k = (s * sep) % big_n;
        let (sin, cos) = phase(k, big_n);
        qq0 += mode.qq;
        pp0 += mode.pp;
        qp0 += mode.qp;
        qq1 += cos * mode.qq;
        pp1 += cos * mode.pp;
        qp1 += cos * mode.qp;
        iq += sin * mode.qq;
        ip += sin * mode.pp;
        ix += sin * mode.qp;
    }
    for v in [iq, ip, ix] {
        imag = imag.max((norm * v).abs());
    }
    let scale = norm * qq0.max(pp0);
    if imag > IMAGINARY_TOLERANCE * scale.max(1.0) {
        return Err(Error::ImaginaryCovariance(imag));
    }
    let (a_q, a_p, c) = (norm * qq0, norm * pp0, norm * qp0);
    let (b_q, b_p, d) = (norm * qq1, norm * pp1, norm * qp1);
    #[rustfmt::skip]
    let matrix = Matrix4::new(
        a_q, c,   b_q, d,
        c,   a_p, d,   b_p,
        b_q, d,   a_q, c,
        d,   b_p, c,   a_p,
    );
    Ok(PairCovariance::new(matrix, (n, m_site)))
}

/// `(sin, cos)` of `2 pi k / n`, exact at the quarter points.
fn phase(k: usize, n: usize) -> (f64, f64) {
    if k == 0 {
        (0.0, 1.0)
    } else if 2 * k == n {
        (0.0, -1.0)
    } else if 4 * k == n {
        (1.0, 0.0)
    } else if 4 * k == 3 * n {
        (-1.0, 0.0)
    } else {
        (2.0 * PI * k as f64 / n as f64).sin_cos()
    }
}

/// Covariance of the opposite pair `(1, 1 + N/2)`.
pub fn opposite_pair_covariance(m: &ModeMoments, config: &ChainConfig) -> Result<PairCovariance> {
    pair_covariance(m, config, 1, config.opposite_site(1))
}

fn symplectic_form() -> Matrix4<f64> {
    #[rustfmt::skip]
    let omega = Matrix4::new(
        0.0,  1.0, 0.0,  0.0,
        -1.0, 0.0, 0.0,  0.0,
        0.0,  0.0, 0.0,  1.0,
        0.0,  0.0, -1.0, 0.0,
    );
    omega
}

/// Moduli of the eigenvalues of `Omega Gamma`, ascending. They come in
/// equal pairs, so entries 0 and 2 are the two symplectic eigenvalues.
pub fn symplectic_spectrum(gamma: &Matrix4<f64>) -> [f64; 4] {
    let ev = (symplectic_form() * gamma).complex_eigenvalues();
    let mut out = [0.0; 4];
    for (o, z) in out.iter_mut().zip(ev.iter()) {
        *o = z.norm();
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Sign flip of the last momentum, i.e. partial transposition of site `m`.
pub fn partial_transpose(gamma: &Matrix4<f64>) -> Matrix4<f64> {
    let flip = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0));
    flip * gamma * flip
}

pub fn check_physical(g: &PairCovariance) -> Result<()> {
    let nu = symplectic_spectrum(&g.matrix)[0];
    if nu < 1.0 - PHYSICALITY_TOLERANCE || !nu.is_finite() {
        return Err(Error::Unphysical(nu));
    }
    Ok(())
}

/// `E_N = -1/2 sum_i log2 min(1, |l_i|)` over the four eigenvalue moduli
/// of the partially transposed covariance.
pub fn log_negativity(g: &PairCovariance) -> Result<f64> {
    check_physical(g)?;
    Ok(negativity_from_spectrum(&symplectic_spectrum(&partial_transpose(&g.matrix))))
}

fn negativity_from_spectrum(spectrum: &[f64]) -> f64 {
    let sum: f64 = spectrum.iter().map(|&l| if l >= 1.0 - PPT_TOLERANCE { 0.0 } else { l.log2() }).sum();
    if sum < 0.0 {
        -0.5 * sum
    } else {
        0.0
    }
}

/// Closed-form symplectic eigenvalues `(|l_1|, |l_2|)` of the partial
/// transpose for a covariance of the form
/// `Gamma_qnqn = Gamma_pnpn = a`, `Gamma_qnqm = Gamma_pnpm = b`,
/// `Gamma_qnpn = c`, `Gamma_qnpm = d`:
///
/// `|l_{1,2}| = sqrt[(a ∓ b - (c ∓ d)) (a ± b + c ± d)]`.
pub fn simplified_eigenvalues(a: f64, b: f64, c: f64, d: f64) -> Result<(f64, f64)> {
    let root = |x: f64| -> Result<f64> {
        if x < -1e-12 * (a.abs() + b.abs() + c.abs() + d.abs()).powi(2).max(1.0) {
            return Err(Error::NegativeRadicand(x));
        }
        Ok(x.max(0.0).sqrt())
    };
    let l1 = root((a - b - (c - d)) * (a + b + c + d))?;
    let l2 = root((a + b - (c + d)) * (a - b + c - d))?;
    Ok((l1, l2))
}

/// Logarithmic negativity from [`simplified_eigenvalues`], each counted twice.
pub fn simplified_log_negativity(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    let (l1, l2) = simplified_eigenvalues(a, b, c, d)?;
    Ok(negativity_from_spectrum(&[l1, l1, l2, l2]))
}

/// Product of the normalized odd- and even-mode sums of `exp(-2 r_s)`.
pub fn bound_argument(r: &[f64]) -> f64 {
    let n = r.len() as f64;
    let (mut odd, mut even) = (0.0, 0.0);
    for (i, &rs) in r.iter().enumerate() {
        if (i + 1) % 2 == 1 {
            odd += (-2.0 * rs).exp();
        } else {
            even += (-2.0 * rs).exp();
        }
    }
    (2.0 / n * odd) * (2.0 / n * even)
}

/// Largest opposite-pair logarithmic negativity attainable with mode
/// squeezings `r` when all angles are synchronized.
pub fn max_log_negativity(r: &[f64], config: &ChainConfig) -> f64 {
    max_log_negativity_with(r, config, ThermalScaling::default())
}

pub fn max_log_negativity_with(r: &[f64], config: &ChainConfig, scaling: ThermalScaling) -> f64 {
    let f = config.thermal_factor();
    let factor = match scaling {
        ThermalScaling::Squared => f * f,
        ThermalScaling::Linear => f,
    };
    let e = -0.5 * (factor * bound_argument(r)).log2();
    e.max(0.0)
}

/// Target angles `3pi/4` (odd `s`) and `pi/4` (even `s`) for `s = 1..=n`.
pub fn optimal_angles(n: usize) -> Vec<f64> {
    (1..=n).map(|s| if s % 2 == 1 { 0.75 * PI } else { 0.25 * PI }).collect()
}

/// Largest distance (mod pi) between extracted and optimal angles over
/// modes squeezed by more than `min_r`.
pub fn angle_mismatch(decomp: &SqueezeDecomposition, min_r: f64) -> f64 {
    optimal_angles(decomp.theta.len())
        .iter()
        .zip(&decomp.theta)
        .zip(&decomp.r)
        .filter(|(_, &r)| r > min_r)
        .map(|((&target, &th), _)| {
            let d = (th - target).rem_euclid(PI);
            d.min(PI - d)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    /// `c sum_s exp(2 r_s) / (4N)`.
    pub ratio: f64,
    /// `ratio < 0.1`.
    pub valid: bool,
    /// `ratio < 0.01`.
    pub strict: bool,
}

pub fn validity_check(c: f64, r: &[f64], config: &ChainConfig) -> Validity {
    let sum: f64 = r.iter().map(|&x| (2.0 * x).exp()).sum();
    let ratio = c * sum / (4.0 * config.n_oscillators() as f64);
    Validity { ratio, valid: ratio < VALIDITY_THRESHOLD, strict: ratio < STRICT_VALIDITY_THRESHOLD }
}

/// Logarithmic negativity between sites `n` and `m_site`.
pub fn pair_log_negativity(m: &ModeMoments, config: &ChainConfig, n: usize, m_site: usize) -> Result<f64> {
    log_negativity(&pair_covariance(m, config, n, m_site)?)
}
