use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use harmonic_chain::dynamics::{extract_squeeze, initial_moments, propagate_to_end};
use harmonic_chain::entanglement::{max_log_negativity, pair_log_negativity};
use harmonic_chain::optimizer::{optimize, OptimizationResult};
use harmonic_chain::protocol::{Metadata, ProtocolFile};
use harmonic_chain::thermo::max_entanglement_temperature;
use harmonic_chain::{ChainConfig, ControlSchedule, Segment, Status};
use serde_json::{json, Value};

use crate::config::Resolved;
use crate::output::{fmt_num, trajectory_table, Table};

fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn peak(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

pub fn simulate(res: &Resolved, schedule: &ControlSchedule, protocol: &Path, out: &Path) -> Result<()> {
    let mut manifest = res.manifest("simulate");
    manifest.insert("protocol_file".into(), protocol.display().to_string().into());
    manifest.insert("c_max".into(), schedule.c_max().into());
    manifest.insert("segments".into(), serde_json::to_value(schedule.segments())?);
    let (table, en) = trajectory_table(&manifest, &res.chain, schedule, res.sample_dt, res.pair)?;
    let path = out_path(out, "simulate.csv");
    table.write(&path)?;
    println!("wrote {} ({} samples, peak E_N {})", path.display(), en.len(), fmt_num(peak(&en)));
    Ok(())
}

pub fn sudden(res: &Resolved, out: &Path) -> Result<()> {
    let s = &res.sudden;
    let c_max = s.coupling.max(res.optimizer.c_max);
    let schedule = ControlSchedule::new(vec![Segment::new(s.horizon, s.coupling)], c_max)?;
    let mut manifest = res.manifest("sudden");
    manifest.insert("sudden".into(), serde_json::to_value(s)?);
    let (table, en) = trajectory_table(&manifest, &res.chain, &schedule, res.sample_dt, res.pair)?;
    let path = out_path(out, "sudden.csv");
    table.write(&path)?;
    println!("wrote {} ({} samples, peak E_N {})", path.display(), en.len(), fmt_num(peak(&en)));
    Ok(())
}

fn run_optimizer(res: &Resolved) -> Result<OptimizationResult> {
    let initial = res.optimizer.initial_protocol()?;
    optimize(&initial, &res.chain, &res.optimizer).context("optimization failed")
}

fn summary(r: &OptimizationResult, config: &ChainConfig) -> Value {
    json!({
        "status": r.status,
        "iterations": r.iterations,
        "initial_cost": r.cost_history.first(),
        "final_cost": r.final_cost(),
        "squeeze_horizon": r.squeeze_stage.total_duration(),
        "mean_squeezing": r.work.mean_squeezing,
        "dissipated_work": r.work.total,
        "ground_energy": config.ground_energy(),
        "energy_after_squeeze": r.energy_after_squeeze,
        "peak_log_negativity": r.peak_log_negativity,
        "peak_time": r.peak_time,
        "bound_at_peak": r.bound_at_peak,
        "frozen_bound": r.frozen_bound,
        "validity_ratio_at_peak": r.validity_at_peak.ratio,
        "angle_mismatch_at_peak": r.angle_mismatch_at_peak,
        "synchronized": r.synchronized,
    })
}

pub fn optimize_cmd(res: &Resolved, out: &Path) -> Result<Status> {
    let result = run_optimizer(res)?;
    let mut manifest = res.manifest("optimize");
    manifest.insert("optimizer".into(), serde_json::to_value(&res.optimizer)?);

    let protocol = ProtocolFile::new(&res.chain, &result.protocol).with_metadata(Metadata::from_result(&result));
    let protocol_path = out_path(out, "protocol.json");
    protocol.write(&protocol_path)?;

    let mut history = Table::new(&manifest, &["iteration".into(), "cost".into()]);
    for (k, j) in result.cost_history.iter().enumerate() {
        history.row(&[k as f64, *j]);
    }
    history.write(&out_path(out, "cost_history.csv"))?;

    let (table, _) = trajectory_table(&manifest, &res.chain, &result.protocol, res.sample_dt, res.pair)?;
    table.write(&out_path(out, "optimize.csv"))?;

    let summary = summary(&result, &res.chain);
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    std::fs::write(out_path(out, "summary.json"), &text)?;
    print!("{text}");
    Ok(result.status)
}

/// Optimizes once at the configured temperature, then replays the protocol
/// at every sweep temperature. The peak is the entanglement held after the
/// final switch-off.
pub fn sweep_temperature(res: &Resolved, out: &Path) -> Result<Status> {
    let result = run_optimizer(res)?;
    let r_mean = result.work.mean_squeezing;
    let t_m = if r_mean > 0.0 { max_entanglement_temperature(r_mean, res.chain.omega0())? } else { 0.0 };
    let freeze_start = {
        let segs = result.protocol.segments();
        ControlSchedule::new(segs[..segs.len() - 1].to_vec(), result.protocol.c_max())?
    };
    let (n, m) = (1, res.chain.opposite_site(1));

    let mut manifest = res.manifest("sweep-temp");
    manifest.insert("optimizer".into(), serde_json::to_value(&res.optimizer)?);
    manifest.insert("temperatures".into(), serde_json::to_value(&res.sweep_temperatures)?);
    let columns = ["T", "peak_E_N", "E_N_max_bound", "mean_squeezing", "T_m"].map(String::from);
    let mut table = Table::new(&manifest, &columns);
    for &t in &res.sweep_temperatures {
        let cfg = res.chain.with_temperature(t)?;
        let state = propagate_to_end(&initial_moments(&cfg), &cfg, &freeze_start);
        let e = pair_log_negativity(&state, &cfg, n, m)?;
        let r = extract_squeeze(&state, &cfg, 0.0)?.r;
        table.row(&[t, e, max_log_negativity(&r, &cfg), r_mean, t_m]);
    }
    let path = out_path(out, "sweep_temperature.csv");
    table.write(&path)?;
    println!("wrote {} ({} temperatures, T_m {})", path.display(), res.sweep_temperatures.len(), fmt_num(t_m));
    Ok(result.status)
}
