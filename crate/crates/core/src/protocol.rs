//! Protocol files: a JSON object with `omega0`, `n_oscillators`,
//! `temperature`, `c_max`, a `segments` list of `{duration, coupling}`
//! records, and an optional `metadata` block written by the optimizer.
//!
//! The canonical form is the pretty-printed serialization followed by a
//! newline; numbers use the shortest representation that round-trips.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, ChainSetup, ControlSchedule, Warning};
use crate::error::{Error, Result};
use crate::optimizer::{OptimizationResult, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub status: Status,
    pub iterations: usize,
    pub horizon: f64,
    pub cost_history: Vec<f64>,
    pub peak_log_negativity: f64,
    pub peak_time: f64,
    pub bound_at_peak: f64,
    pub frozen_bound: f64,
    pub validity_ratio: f64,
    pub mean_squeezing: f64,
    pub dissipated_work: f64,
}

impl Metadata {
    pub fn from_result(res: &OptimizationResult) -> Self {
        Self {
            status: res.status,
            iterations: res.iterations,
            horizon: res.squeeze_stage.total_duration(),
            cost_history: res.cost_history.clone(),
            peak_log_negativity: res.peak_log_negativity,
            peak_time: res.peak_time,
            bound_at_peak: res.bound_at_peak,
            frozen_bound: res.frozen_bound,
            validity_ratio: res.validity_at_peak.ratio,
            mean_squeezing: res.work.mean_squeezing,
            dissipated_work: res.work.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFile {
    #[serde(flatten)]
    pub setup: ChainSetup,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl ProtocolFile {
    pub fn new(config: &ChainConfig, schedule: &ControlSchedule) -> Self {
        Self { setup: ChainSetup::from_parts(config, schedule), metadata: None }
    }

    pub fn with_metadata(mut self, metadata: Metadata) -> Self {
        self.metadata = Some(metadata);
        self
    }

    /// Parses without validating parameter values.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("protocol serializes");
        s.push('\n');
        s
    }

    pub fn build(&self) -> Result<(ChainConfig, ControlSchedule)> {
        self.setup.build()
    }

    pub fn validate(&self) -> Result<Vec<Warning>> {
        self.setup.validate()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_canonical_string())?;
        Ok(())
    }

    /// Reads and validates a protocol file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file = Self::parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        file.validate().map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Ok(file)
    }
}

/// Reads a protocol file into a validated chain configuration and schedule.
pub fn parse_protocol_file(path: &Path) -> Result<(ChainConfig, ControlSchedule)> {
    ProtocolFile::load(path)?.build()
}
