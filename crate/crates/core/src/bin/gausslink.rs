use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use gausslink::experiments::{self, CliOverrides, ConfigFile, Experiment, ExperimentConfig};
use gausslink::Error;

const CONVENTIONS: &str = "\
dB conventions:
  squeezing dB = 10*log10(e^(2r))   (r = dB*ln(10)/20; 5 dB -> r = 0.576)
  loss dB      = -10*log10(tau)     (tau = 10^(-dB/10); 3 dB -> tau = 0.501)

Config files are flat JSON objects whose keys mirror the experiment settings
(d_a, d_b, tau_a, tau_b, n_th, kappa_a, kappa_b, gamma_m, squeezing_db,
d_b_values, d_a_min, d_a_max, points, loss_db_min, loss_db_max, loss_db_step,
fiber_km, loss_db_per_km, bandwidth_hz, validation_scale, seed, jobs, out,
preset, experiment). Command-line flags override the file.

Exit status: 0 success, 1 validation failure, 2 configuration or I/O error.";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    ThresholdVsDa,
    ThresholdVsLoss,
    DeviceRun,
    EbitRate,
    Validate,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::ThresholdVsDa => Experiment::ThresholdVsDa,
            Command::ThresholdVsLoss => Experiment::ThresholdVsLoss,
            Command::DeviceRun => Experiment::DeviceRun,
            Command::EbitRate => Experiment::EbitRate,
            Command::Validate => Experiment::Validate,
        }
    }
}

/// Microwave entanglement distribution through optomechanical transducers.
///
/// Sweeps write CSV with a commented provenance header; ebit-rate and
/// validate write JSON.
#[derive(Debug, Parser)]
#[command(name = "gausslink", version, after_help = CONVENTIONS)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled device parameters (brubaker2022).
    #[arg(long)]
    preset: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("gausslink: validation failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("gausslink: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &Args) -> Result<bool, Error> {
    let file = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let cli = CliOverrides { preset: args.preset.clone(), out: args.out.clone(), seed: args.seed, jobs: args.jobs };
    let cfg = ExperimentConfig::resolve(args.command.into(), file.as_ref(), &cli)?;
    let outcome = experiments::run(&cfg)?;
    experiments::emit(&outcome.text, cfg.out.as_deref())?;
    Ok(outcome.passed)
}
