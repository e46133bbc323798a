//! `msnake`: reproducible experiments on the Matsuoka snake pipeline.
//!
//! Every subcommand resolves its configuration as defaults, then the
//! `--config` file, then `--set key=value` overrides, and writes plot-ready
//! CSV whose `#` header holds the resolved configuration and seed.

mod commands;
mod grid;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "msnake", version, about = "Matsuoka CPG snake experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML file merged over the subcommand's defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set b=9.5` or `--set env.randomize=false`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Output directory [default: $MSNAKE_OUT_DIR or the working directory].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the network and dump the trajectory.
    SimulateCpg(commands::SimulateArgs),
    /// Report the oscillation-existence inequality and derived quantities.
    ValidateParams,
    /// Constant exclusive drive on a primitive oscillator: bias vs u_e.
    BiasSweep(commands::BiasArgs),
    /// Square-wave drive: bias vs duty cycle.
    DutySweep(commands::DutyArgs),
    /// Oscillation frequency vs K_f and the fitted exponent.
    FreqSweep(commands::FreqArgs),
    /// Entrainment threshold A_0 over a grid of forcing frequencies.
    Threshold(commands::ThresholdArgs),
    /// Surrogate speed over a (c, K_f) grid.
    VelocitySweep(commands::VelocityArgs),
    /// Evolve oscillator parameters.
    TuneGp(commands::TuneArgs),
    /// Train a policy through the curriculum.
    Train(commands::TrainArgs),
    /// Run a trained policy through a goal script.
    Rollout(commands::RolloutArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let result = match &cli.command {
        Command::SimulateCpg(a) => commands::simulate_cpg(c, a),
        Command::ValidateParams => commands::validate(c),
        Command::BiasSweep(a) => commands::bias(c, a),
        Command::DutySweep(a) => commands::duty(c, a),
        Command::FreqSweep(a) => commands::freq(c, a),
        Command::Threshold(a) => commands::threshold(c, a),
        Command::VelocitySweep(a) => commands::velocity(c, a),
        Command::TuneGp(a) => commands::tune(c, a),
        Command::Train(a) => commands::train(c, a),
        Command::Rollout(a) => commands::rollout(c, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
