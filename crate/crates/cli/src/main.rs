//! `harmonic-chain`: simulate, optimize and sweep coupling protocols for a
//! periodic harmonic chain, writing CSV time series.
//!
//! Exit codes: 0 success, 1 input error, 2 optimizer did not converge.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use harmonic_chain::protocol::ProtocolFile;
use harmonic_chain::Status;

use config::{Overrides, Resolved, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "harmonic-chain",
    version,
    about = "Entanglement generation in a harmonic chain by coupling modulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Protocol file to simulate.
    #[arg(long, global = true)]
    protocol: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Site pair for the E_N column, e.g. `1,5`.
    #[arg(long, global = true, value_parser = config::parse_pair)]
    pair: Option<(usize, usize)>,

    #[arg(long, global = true)]
    temperature: Option<f64>,

    #[arg(long = "sample-dt", global = true)]
    sample_dt: Option<f64>,

    /// Seed for the optimizer's random restarts.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Replay a protocol file.
    Simulate,
    /// Optimize the squeeze stage, then synchronize and freeze.
    Optimize,
    /// Sudden switch to a constant coupling.
    Sudden,
    /// Peak entanglement of the optimized protocol across temperatures.
    SweepTemp,
}

enum Outcome {
    Done,
    NotConverged(Status),
}

fn run(cli: &Cli) -> Result<Outcome> {
    let run_config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let overrides =
        Overrides { temperature: cli.temperature, sample_dt: cli.sample_dt, pair: cli.pair, seed: cli.seed };
    if cli.protocol.is_some() && cli.command != Command::Simulate {
        bail!("--protocol is only used by simulate");
    }
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;

    let status = match cli.command {
        Command::Simulate => {
            let path = cli.protocol.as_ref().context("simulate needs --protocol <file>")?;
            let file = ProtocolFile::load(path)?;
            for w in file.validate()? {
                eprintln!("warning: {w}");
            }
            let (chain, schedule) = file.build()?;
            let resolved = Resolved::new(&run_config, Some(chain), &overrides)?;
            commands::simulate(&resolved, &schedule, path, &cli.out)?;
            Status::Converged
        }
        Command::Sudden => {
            commands::sudden(&Resolved::new(&run_config, None, &overrides)?, &cli.out)?;
            Status::Converged
        }
        Command::Optimize => commands::optimize_cmd(&Resolved::new(&run_config, None, &overrides)?, &cli.out)?,
        Command::SweepTemp => commands::sweep_temperature(&Resolved::new(&run_config, None, &overrides)?, &cli.out)?,
    };
    Ok(if status.is_converged() { Outcome::Done } else { Outcome::NotConverged(status) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged(status)) => {
            eprintln!("optimizer did not converge: {status:?}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
