//! Command-line experiments: parameter sweeps, scalar reports and the
//! randomised validation suite.

pub mod config;
pub mod output;
pub mod sweeps;
pub mod validate;

use std::path::Path;

pub use config::{CliOverrides, ConfigFile, Experiment, ExperimentConfig};
pub use output::{Cell, Table};

use crate::error::Result;

/// Rendered experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    /// False only when validation found a failing check.
    pub passed: bool,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let csv = |t: Table| -> Result<Outcome> { Ok(Outcome { text: output::render_csv(cfg, &t)?, passed: true }) };
    match cfg.experiment {
        Experiment::ThresholdVsDa => csv(sweeps::threshold_vs_da(cfg)?),
        Experiment::ThresholdVsLoss => csv(sweeps::threshold_vs_loss(cfg)?),
        Experiment::DeviceRun => csv(sweeps::device_run(cfg)?),
        Experiment::EbitRate => Ok(Outcome { text: output::render_json(&sweeps::ebit_rate(cfg)?)?, passed: true }),
        Experiment::Validate => {
            let report = validate::run_validation(cfg)?;
            Ok(Outcome { text: output::render_json(&report)?, passed: report.passed })
        }
    }
}

/// Writes to `out`, or stdout when absent.
pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
