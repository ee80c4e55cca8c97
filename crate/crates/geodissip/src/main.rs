use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use geodissip::config::{Experiment, ExperimentConfig};
use geodissip::estimate::{estimate, PhysicalEstimateInput};
use geodissip::experiments;
use geodissip::Error;

/// Dissipation, frequency conversion, and topological dissipation bounds for
/// slowly driven two-level systems.
#[derive(Parser)]
#[command(name = "geodissip", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a flat key = value config file.
    Run { config: PathBuf },
    /// Physical-units estimate of the topological dissipation floor.
    Estimate {
        /// Field amplitude |B| in rad/s.
        #[arg(long)]
        field: f64,
        /// First drive angular frequency in rad/s.
        #[arg(long)]
        omega1: f64,
        /// Second drive angular frequency in rad/s.
        #[arg(long)]
        omega2: f64,
        /// Transverse relaxation time in seconds.
        #[arg(long)]
        tau2: f64,
        /// Chern number of the driven band.
        #[arg(long)]
        chern: i64,
        /// Number of atoms in the cloud (heating rate is independent of it).
        #[arg(long, default_value_t = 1)]
        atoms: u64,
    },
    /// Chern-number sweep from a config file (forces experiment = chern).
    Chern { config: PathBuf },
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

fn real_main() -> Result<(), Error> {
    match Cli::parse().command {
        Command::Run { config } => {
            let config = load_config(&config)?;
            let path = experiments::run(&config)?;
            println!("wrote {}", path.display());
        }
        Command::Estimate {
            field,
            omega1,
            omega2,
            tau2,
            chern,
            atoms,
        } => {
            let r = estimate(&PhysicalEstimateInput {
                field_amplitude: field,
                omega1,
                omega2,
                tau2,
                chern,
                n_atoms: atoms,
            })?;
            println!("gamma            = {:.4}  (Delta = |B|)", r.gamma);
            println!("gamma (2|B| gap) = {:.4}", r.gamma_doubled_gap);
            println!("W_d              = {:.3e} W per atom", r.w_d_watts);
            println!("dT/dt            = {:.3e} K/s", r.dtdt_kelvin_per_s);
        }
        Command::Chern { config } => {
            let mut config = load_config(&config)?;
            config.experiment = Experiment::Chern;
            let path = experiments::run(&config)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) => ExitCode::from(2),
                Error::GapClosure { .. } | Error::UnresolvedTopology { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
