use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bbgky_qem::run::{
    cmd_hierarchy, cmd_metrics, cmd_mitigate, cmd_reproduce, cmd_simulate, Preset, RunConfig,
};
use bbgky_qem::Error;

/// BBGKY-hierarchy-informed error mitigation for noisy spin-chain
/// simulations.
#[derive(Parser)]
#[command(name = "bbgky-qem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker pool size override for parameter sweeps.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Layer census, subhierarchy radius, full partition and graph exports.
    Hierarchy(Common),
    /// Ideal/reference Trotter runs and the noisy measurement table.
    Simulate(Common),
    /// Annealed-chain mitigation of a stored measurement table.
    Mitigate(Common),
    /// Recompute norms and fit metrics from stored trajectories.
    Metrics(Common),
    /// Preset sweeps over model realizations and radii.
    Reproduce {
        #[command(flatten)]
        common: Common,
        /// One of: fig5-like, fig6-like, table1-like.
        #[arg(long)]
        preset: String,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.output.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    if let Some(jobs) = common.jobs {
        cfg.output.jobs = jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    let manifest = match &cli.command {
        Command::Hierarchy(common) => cmd_hierarchy(&load_config(common)?)?,
        Command::Simulate(common) => cmd_simulate(&load_config(common)?)?,
        Command::Mitigate(common) => cmd_mitigate(&load_config(common)?)?,
        Command::Metrics(common) => cmd_metrics(&load_config(common)?)?,
        Command::Reproduce { common, preset } => {
            cmd_reproduce(&load_config(common)?, Preset::parse(preset)?)?
        }
    };
    println!(
        "{}: wrote {} artifact(s) to {}",
        manifest.command,
        manifest.artifacts.len(),
        manifest.config.output.dir.display()
    );
    println!(
        "{}",
        serde_json::to_string_pretty(&manifest.summary).unwrap_or_default()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Config(_) | Error::Parse { .. } => 2,
                Error::Guard(_) => 3,
                Error::Numerical(_) => 4,
                Error::Io(_) => 1,
            };
            ExitCode::from(code)
        }
    }
}
