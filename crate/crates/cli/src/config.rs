//! Run configuration file and its resolution against command-line overrides.

use std::path::Path;

use anyhow::{bail, Context, Result};
use harmonic_chain::{ChainConfig, OptimizerConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuddenConfig {
    pub coupling: f64,
    pub horizon: f64,
}

impl Default for SuddenConfig {
    fn default() -> Self {
        Self { coupling: 0.05, horizon: 200.0 }
    }
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub omega0: f64,
    pub n_oscillators: usize,
    pub temperature: f64,
    /// Output sampling interval; `0.05 / omega0` when absent.
    pub sample_dt: Option<f64>,
    /// Site pair for the `E_N` column; the opposite pair when absent.
    pub pair: Option<(usize, usize)>,
    pub optimizer: OptimizerConfig,
    pub sudden: SuddenConfig,
    pub sweep_temperatures: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            n_oscillators: 8,
            temperature: 0.0,
            sample_dt: None,
            pair: None,
            optimizer: OptimizerConfig::default(),
            sudden: SuddenConfig::default(),
            sweep_temperatures: vec![0.0, 0.25, 0.5, 1.0],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub temperature: Option<f64>,
    pub sample_dt: Option<f64>,
    pub pair: Option<(usize, usize)>,
    pub seed: Option<u64>,
}

/// Fully resolved settings shared by all commands.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub chain: ChainConfig,
    pub sample_dt: f64,
    pub pair: (usize, usize),
    pub optimizer: OptimizerConfig,
    pub sudden: SuddenConfig,
    pub sweep_temperatures: Vec<f64>,
}

impl Resolved {
    /// `chain` overrides the chain parameters of `run` (used when a
    /// protocol file supplies them).
    pub fn new(run: &RunConfig, chain: Option<ChainConfig>, ov: &Overrides) -> Result<Self> {
        let mut chain = match chain {
            Some(c) => c,
            None => ChainConfig::new(run.n_oscillators, run.omega0, run.temperature)?,
        };
        if let Some(t) = ov.temperature {
            chain = chain.with_temperature(t)?;
        }
        let sample_dt = ov.sample_dt.or(run.sample_dt).unwrap_or(0.05 / chain.omega0());
        if !(sample_dt > 0.0 && sample_dt.is_finite()) {
            bail!("sample_dt must be positive, got {sample_dt}");
        }
        let n = chain.n_oscillators();
        let pair = ov.pair.or(run.pair).unwrap_or((1, chain.opposite_site(1)));
        for site in [pair.0, pair.1] {
            if site == 0 || site > n {
                bail!("pair site {site} out of range 1..={n}");
            }
        }
        if pair.0 == pair.1 {
            bail!("pair needs two distinct sites, got {},{}", pair.0, pair.1);
        }
        let mut optimizer = run.optimizer.clone();
        if let Some(seed) = ov.seed {
            optimizer.seed = seed;
        }
        optimizer.validate()?;
        if run.sweep_temperatures.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            bail!("sweep temperatures must be non-negative");
        }
        if !(run.sudden.coupling >= 0.0 && run.sudden.horizon > 0.0) {
            bail!("sudden switch needs coupling >= 0 and horizon > 0");
        }
        Ok(Self {
            chain,
            sample_dt,
            pair,
            optimizer,
            sudden: run.sudden.clone(),
            sweep_temperatures: run.sweep_temperatures.clone(),
        })
    }

    /// Base of every output header.
    pub fn manifest(&self, command: &str) -> serde_json::Map<String, serde_json::Value> {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), command.into());
        m.insert("omega0".into(), self.chain.omega0().into());
        m.insert("n_oscillators".into(), self.chain.n_oscillators().into());
        m.insert("temperature".into(), self.chain.temperature().into());
        m.insert("sample_dt".into(), self.sample_dt.into());
        m.insert("pair".into(), serde_json::json!([self.pair.0, self.pair.1]));
        m
    }
}

pub fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected n,m, got {s:?}"))?;
    let site = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad site {x:?}: {e}"));
    Ok((site(a)?, site(b)?))
}
