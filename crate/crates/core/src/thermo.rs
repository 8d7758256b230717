//! Dissipated work, energy bookkeeping and thermal factors.

use crate::chain::ChainConfig;
use crate::dynamics::{ModeMoments, SqueezeDecomposition};
use crate::error::{Error, Result};

/// Irreversible work stored in one mode, `omega sinh²(r)`.
pub fn dissipated_work_mode(omega: f64, r: f64) -> f64 {
    let s = r.sinh();
    omega * s * s
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkReport {
    /// Per-mode dissipated work, mode `s` at index `s - 1`.
    pub per_mode: Vec<f64>,
    pub total: f64,
    /// `N omega0 / 2`.
    pub ground_energy: f64,
    /// `ground_energy + total`.
    pub energy: f64,
    /// Mean squeezing `R = sum_s r_s / N`.
    pub mean_squeezing: f64,
}

pub fn total_dissipated_work(decomp: &SqueezeDecomposition, config: &ChainConfig) -> WorkReport {
    let per_mode: Vec<f64> = decomp.omega.iter().zip(&decomp.r).map(|(&w, &r)| dissipated_work_mode(w, r)).collect();
    let total = per_mode.iter().sum();
    let ground_energy = config.ground_energy();
    WorkReport {
        per_mode,
        total,
        ground_energy,
        energy: ground_energy + total,
        mean_squeezing: decomp.mean_squeezing(),
    }
}

/// Mean energy `1/2 sum_s (pp_s + omega_s² qq_s)` at coupling `c`.
pub fn chain_energy(m: &ModeMoments, config: &ChainConfig, c: f64) -> f64 {
    m.modes()
        .iter()
        .enumerate()
        .map(|(i, mode)| {
            let w = config.mode_frequency(i + 1, c);
            0.5 * (mode.pp + w * w * mode.qq)
        })
        .sum()
}

/// `f(T) = coth(omega0 / 2T)`, with `f(0) = 1`.
pub fn thermal_factor(temperature: f64, omega0: f64) -> f64 {
    if temperature <= 0.0 {
        return 1.0;
    }
    1.0 / (omega0 / (2.0 * temperature)).tanh()
}

/// Estimate `omega0 / ln(coth 2R)` of the temperature above which the
/// entanglement generated with mean squeezing `R` disappears.
pub fn max_entanglement_temperature(mean_squeezing: f64, omega0: f64) -> Result<f64> {
    if !(mean_squeezing > 0.0) {
        return Err(Error::NonPositiveSqueezing(mean_squeezing));
    }
    let coth = 1.0 / (2.0 * mean_squeezing).tanh();
    Ok(omega0 / coth.ln())
}
