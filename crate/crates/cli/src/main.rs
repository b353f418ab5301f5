mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Overrides;

#[derive(Parser)]
#[command(name = "wzw-mps", version, about = "Matrix product approximations of chiral WZW and free-boson correlators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Build (or load from the cache) the modules and field blocks of the chain
    ModuleBuild,
    /// Evaluate one correlator with its certified bound
    Correlator,
    /// Sweep spacings and truncations, writing convergence and replacement CSVs
    Convergence,
    /// Partition tables, bond-dimension bounds and scaling fits
    Bounds,
    /// Compare the pipeline against the oracles on reference instances
    Verify,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<wzw_mps::Error>() {
        Some(wzw_mps::Error::NonConvergence { .. }) => 3,
        Some(wzw_mps::Error::Io(_)) => 1,
        Some(_) => 2,
        None if e.downcast_ref::<std::io::Error>().is_some() || e.downcast_ref::<csv::Error>().is_some() => 1,
        None => 2,
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = cli.overrides.resolve()?;
    if let Some(j) = cfg.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global()?;
    }
    match cli.command {
        Command::ModuleBuild => commands::module_build(&cfg)?,
        Command::Correlator => commands::correlator(&cfg)?,
        Command::Convergence => commands::convergence(&cfg)?,
        Command::Bounds => commands::bounds(&cfg)?,
        Command::Verify => return commands::verify(&cfg),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
