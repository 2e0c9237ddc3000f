//! `gaussperc` — capacities, field samples and excursion-set percolation
//! estimates from a TOML experiment config.
//!
//! Exit codes: 0 success, 2 config error, 3 resource error, 4 total run
//! failure.

use clap::{Parser, Subcommand};
use gaussperc_core::experiments::{run_config, ExperimentConfig};
use gaussperc_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gaussperc",
    about = "Capacities, Gaussian field synthesis and excursion-set percolation at desk scale",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity solves: single domains or the Riesz reference table
    Capacity(RunArgs),
    /// Write field samples (flat binary + JSON sidecar) or covariance tables
    Sample(RunArgs),
    /// Connection-event probability estimates and correlation lengths
    Percolate(RunArgs),
    /// Decay-rate estimates over an R schedule plus a model fit
    Rates(RunArgs),
    /// Largest-cluster diameter quantiles over nested windows
    Diameter(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config file (TOML; see the module docs for the grammar)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON reports
    #[arg(long)]
    out: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the worker-pool size
    #[arg(long)]
    threads: Option<usize>,
}

fn allowed_kinds(cmd: &Command) -> &'static [&'static str] {
    match cmd {
        Command::Capacity(_) => &["capacity", "capacity_table"],
        Command::Sample(_) => &["sample", "covariance_validation"],
        Command::Percolate(_) => &["percolate", "correlation_length"],
        Command::Rates(_) => &["decay_rate"],
        Command::Diameter(_) => &["diameter"],
    }
}

fn args(cmd: &Command) -> &RunArgs {
    match cmd {
        Command::Capacity(a)
        | Command::Sample(a)
        | Command::Percolate(a)
        | Command::Rates(a)
        | Command::Diameter(a) => a,
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let a = args(&cli.command);
    let mut cfg = ExperimentConfig::load(&a.config)?;
    let allowed = allowed_kinds(&cli.command);
    if !allowed.contains(&cfg.experiment.kind.as_str()) {
        return Err(Error::Config(format!(
            "experiment kind {:?} is not valid for this subcommand (expected one of {allowed:?})",
            cfg.experiment.kind
        )));
    }
    if let Some(seed) = a.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(threads) = a.threads {
        cfg.experiment.threads = Some(threads);
    }
    let summary = run_config(&cfg, &a.out)?;
    for (row, err) in &summary.row_failures {
        eprintln!("row failed: {row}: {err}");
    }
    println!(
        "wrote {} file(s) to {}",
        summary.files.len(),
        summary.out_dir.display()
    );
    for f in &summary.files {
        println!("  {f}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                Error::Resource(_) => ExitCode::from(3),
                _ => ExitCode::from(4),
            }
        }
    }
}
