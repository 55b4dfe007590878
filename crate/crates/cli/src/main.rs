//! `swarm-escape`: experiment runner and bound calculator for the stagnated
//! single-agent model. Each subcommand reads one JSON config (all fields
//! defaulted), lets flags override file values, and emits CSV or JSON that
//! is byte-identical for a fixed (config, seed).

mod commands;
mod config;
mod error;
mod fuzz;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::load_config;
use crate::error::{CliError, Result};

#[derive(Parser)]
#[command(name = "swarm-escape", version, about = "Escape-time experiments for a stagnated PSO agent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output file (default stdout). $SWARM_ESCAPE_OUT_DIR overrides its directory.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for the replication pool (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fuzz velocity-kernel configurations: normalization, sampler-vs-CDF KS
    /// statistic, and the universal floor margin.
    KernelCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Escape-time bound calculator (JSON).
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Build and re-verify fuzzed transition chains for all three legs.
    ChainVerify {
        #[command(flatten)]
        common: Common,
        /// Double one target interval per chain; verification is expected to fail.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Monte Carlo escape curve (CSV: t, prob, stderr).
    EscapeCurve {
        #[command(flatten)]
        common: Common,
    },
    /// Escape-probability sweep over an (omega, c, ub) grid.
    PeTable {
        #[command(flatten)]
        common: Common,
        /// Full-scale sweep: 10^4 runs capped at 10^7 iterations per cell.
        #[arg(long)]
        full: bool,
    },
    /// Per-iteration position histograms plus boundary and goal masses.
    Distribution {
        #[command(flatten)]
        common: Common,
    },
    /// Plain PSO on 2-D Rastrigin with a stagnation report.
    RastriginDemo {
        #[command(flatten)]
        common: Common,
    },
}

fn init_pool(jobs: Option<usize>) -> Result<()> {
    let Some(jobs) = jobs else {
        return Ok(());
    };
    if jobs == 0 {
        return Err(CliError::validation("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::validation(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::KernelCheck { common } => {
            init_pool(common.jobs)?;
            let mut cfg: commands::KernelCheckConfig = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if common.out.is_some() {
                cfg.out = common.out;
            }
            commands::kernel_check(cfg)
        }
        Command::Bounds { common } => {
            init_pool(common.jobs)?;
            let mut cfg: commands::BoundsConfig = load_config(common.config.as_deref())?;
            if common.out.is_some() {
                cfg.out = common.out;
            }
            commands::bounds(cfg)
        }
        Command::ChainVerify { common, inject_fault } => {
            init_pool(common.jobs)?;
            let mut cfg: commands::ChainVerifyConfig = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if common.out.is_some() {
                cfg.out = common.out;
            }
            if inject_fault {
                cfg.inject_fault = true;
            }
            commands::chain_verify(cfg)
        }
        Command::EscapeCurve { common } => {
            init_pool(common.jobs)?;
            let mut cfg: commands::EscapeCurveConfig = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if common.out.is_some() {
                cfg.out = common.out;
            }
            commands::escape_curve(cfg)
        }
        Command::PeTable { common, full } => {
            init_pool(common.jobs)?;
            let mut cfg: commands::PeTableConfig = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if common.out.is_some() {
                cfg.out = common.out;
            }
            commands::pe_table(cfg, full)
        }
        Command::Distribution { common } => {
            init_pool(common.jobs)?;
            let mut cfg: commands::DistributionConfig = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if common.out.is_some() {
                cfg.out = common.out;
            }
            commands::distribution(cfg)
        }
        Command::RastriginDemo { common } => {
            init_pool(common.jobs)?;
            let mut cfg: commands::RastriginConfig = load_config(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if common.out.is_some() {
                cfg.out = common.out;
            }
            commands::rastrigin_demo(cfg)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
