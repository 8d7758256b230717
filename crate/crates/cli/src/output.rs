//! CSV emission.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use harmonic_chain::dynamics::{extract_squeeze, initial_moments, propagate_schedule};
use harmonic_chain::entanglement::{max_log_negativity, pair_log_negativity, validity_check};
use harmonic_chain::thermo::{chain_energy, total_dissipated_work};
use harmonic_chain::{ChainConfig, ControlSchedule};
use serde_json::{Map, Value};

/// `%.12g`: 12 significant digits, trailing zeros dropped, `-0` printed as `0`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `#`-prefixed pretty JSON of the resolved configuration.
pub fn header(manifest: &Map<String, Value>) -> String {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.lines().map(|l| format!("# {l}\n")).collect()
}

pub struct Table {
    text: String,
}

impl Table {
    pub fn new(manifest: &Map<String, Value>, columns: &[String]) -> Self {
        let mut text = header(manifest);
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        let mut first = true;
        for v in values {
            if !first {
                self.text.push(',');
            }
            first = false;
            let _ = write!(self.text, "{}", fmt_num(*v));
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.text).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn trajectory_columns(n: usize) -> Vec<String> {
    let mut cols: Vec<String> =
        ["t", "E_N", "E_N_max_bound", "energy", "W_dis", "validity_ratio"].iter().map(|s| s.to_string()).collect();
    cols.extend((1..=n).map(|s| format!("r_{s}")));
    cols.extend((1..=n).map(|s| format!("theta_{s}")));
    cols.push("c".into());
    cols
}

/// Samples `schedule` from the thermal initial state and tabulates every
/// trajectory column. Returns the table and the `E_N` column.
pub fn trajectory_table(
    manifest: &Map<String, Value>,
    config: &ChainConfig,
    schedule: &ControlSchedule,
    sample_dt: f64,
    pair: (usize, usize),
) -> Result<(Table, Vec<f64>)> {
    let n = config.n_oscillators();
    let mut table = Table::new(manifest, &trajectory_columns(n));
    let mut en = Vec::new();
    for p in propagate_schedule(&initial_moments(config), config, schedule, sample_dt)? {
        let c = p.coupling;
        let d = extract_squeeze(&p.moments, config, c)?;
        let e = pair_log_negativity(&p.moments, config, pair.0, pair.1)?;
        let mut row = vec![
            p.moments.time,
            e,
            max_log_negativity(&d.r, config),
            chain_energy(&p.moments, config, c),
            total_dissipated_work(&d, config).total,
            validity_check(c, &d.r, config).ratio,
        ];
        row.extend(&d.r);
        row.extend(&d.theta);
        row.push(c);
        table.row(&row);
        en.push(e);
    }
    Ok((table, en))
}
