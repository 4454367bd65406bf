//! Experiment runner for amplifier distortion and predistortion in MIMO
//! SWIPT links. Each experiment reads one TOML configuration file and
//! writes CSV tables with JSON metadata sidecars.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

use clap::Parser;

pub use config::{Experiment, ExperimentConfig};
pub use error::{CliError, CliResult};

use output::OutputSet;

#[derive(Debug, Parser)]
#[command(
    name = "swipt-sim",
    version,
    about = "Amplifier distortion and predistortion experiments for MIMO SWIPT links"
)]
pub struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configured base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(args: &Args) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    cfg.experiment = Some(args.experiment);
    Ok(cfg)
}

/// Runs one experiment and writes its outputs under `out_dir`. Returns
/// the written paths in write order.
pub fn run_experiment(
    experiment: Experiment,
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> CliResult<Vec<PathBuf>> {
    let mut out = OutputSet::new(out_dir, experiment, cfg)?;
    match experiment {
        Experiment::Fit => output::write_fit(&mut out, &experiments::run_fit(cfg)?)?,
        Experiment::Psd => output::write_psd(&mut out, &experiments::run_psd(cfg)?)?,
        Experiment::Ccdf => output::write_ccdf(&mut out, &experiments::run_ccdf(cfg)?)?,
        Experiment::RateSweep => {
            output::write_rate_sweep(&mut out, &experiments::run_rate_sweep(cfg)?)?
        }
        Experiment::ReRegion => {
            output::write_re_region(&mut out, &experiments::run_re_region(cfg)?)?
        }
        Experiment::Correlation => {
            output::write_correlation(&mut out, &experiments::run_correlation(cfg)?)?
        }
    }
    Ok(out.into_paths())
}

/// Command-line entry point; returns the process exit status.
pub fn main_with_args(args: Args) -> i32 {
    let result = resolve_config(&args).and_then(|cfg| {
        let dir = PathBuf::from(&cfg.out_dir);
        run_experiment(args.experiment, &cfg, &dir)
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("swipt-sim: {e}");
            e.exit_code()
        }
    }
}
