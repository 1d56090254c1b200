//! Command-line driver for wave-packet experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swpdyn::config::ExperimentConfig;
use swpdyn::error::Error;
use swpdyn::{experiment, validate};

#[derive(Parser)]
#[command(
    name = "swpdyn",
    about = "Semiclassical wave-packet dynamics: classical, packet, and phase-space ensemble runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file (flat key = value format).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Ensemble RNG seed; overrides `egorov.seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Also write SVG plots where a run produces them.
    #[arg(long, global = true)]
    plots: bool,

    /// Fix the ensemble partition and summation order. Runs are reproducible
    /// by construction; the flag is accepted for interface stability.
    #[arg(long, global = true)]
    reproducible: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the classical system with Störmer-Verlet.
    Classical,
    /// Integrate the reduced packet system with the variational splitting.
    Semiclassical,
    /// Sample the packet's phase-space density and propagate the ensemble.
    Egorov,
    /// Run all three and write comparison artifacts.
    Compare,
    /// Evaluate the initial packet on its quadrature grid.
    PacketEval,
    /// Run the cross-module verification suites.
    Validate,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut cause = std::error::Error::source(&e);
            while let Some(c) = cause {
                eprintln!("  caused by: {c}");
                cause = c.source();
            }
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> ExitCode {
    match e {
        Error::Config { .. } | Error::InvalidArgument { .. } | Error::DimensionMismatch { .. } => {
            ExitCode::from(2)
        }
        Error::Io(_) => ExitCode::from(2),
        Error::Propagation { source, .. } => exit_code_for(source),
        Error::Numerical { .. } | Error::NoConvergence { .. } | Error::NotPositiveDefinite { .. } => {
            ExitCode::from(3)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config {
        line: 0,
        message: "a --config file is required for this subcommand".into(),
    })?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.egorov_seed = seed;
    }
    if cli.plots {
        cfg.plots = true;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Classical => report_files(experiment::run_classical(&load_config(&cli)?)?),
        Command::Semiclassical => report_files(experiment::run_semiclassical(&load_config(&cli)?)?),
        Command::Egorov => report_files(experiment::run_egorov(&load_config(&cli)?)?),
        Command::Compare => report_files(experiment::run_compare(&load_config(&cli)?)?),
        Command::PacketEval => report_files(experiment::run_packet_eval(&load_config(&cli)?)?),
        Command::Validate => {
            let results = validate::run_all()?;
            let mut failed = 0;
            for r in &results {
                println!("{}", r.line());
                if !r.pass {
                    failed += 1;
                }
            }
            if failed > 0 {
                println!("{failed} of {} checks failed", results.len());
                Ok(ExitCode::from(1))
            } else {
                println!("all {} checks passed", results.len());
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}

fn report_files(files: Vec<PathBuf>) -> Result<ExitCode, Error> {
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}
