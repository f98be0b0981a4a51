use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transducer::{DeviceCaps, PhysicalRates};

pub const PRESET_BRUBAKER2022: &str = "brubaker2022";
pub const DEFAULT_SEED: u64 = 20220601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ThresholdVsDa,
    ThresholdVsLoss,
    DeviceRun,
    EbitRate,
    Validate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ThresholdVsDa => "threshold-vs-da",
            Experiment::ThresholdVsLoss => "threshold-vs-loss",
            Experiment::DeviceRun => "device-run",
            Experiment::EbitRate => "ebit-rate",
            Experiment::Validate => "validate",
        }
    }
}

/// Config file contents. Every key is optional and overrides the
/// experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub preset: Option<String>,
    pub d_a: Option<f64>,
    pub d_b: Option<f64>,
    pub tau_a: Option<f64>,
    pub tau_b: Option<f64>,
    pub n_th: Option<f64>,
    pub kappa_a: Option<f64>,
    pub kappa_b: Option<f64>,
    pub gamma_m: Option<f64>,
    pub squeezing_db: Option<Vec<f64>>,
    pub d_b_values: Option<Vec<f64>>,
    pub d_a_min: Option<f64>,
    pub d_a_max: Option<f64>,
    pub points: Option<usize>,
    pub loss_db_min: Option<f64>,
    pub loss_db_max: Option<f64>,
    pub loss_db_step: Option<f64>,
    pub fiber_km: Option<f64>,
    pub loss_db_per_km: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub validation_scale: Option<f64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Overrides given on the command line; they win over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliOverrides {
    pub preset: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub preset: Option<String>,
    pub caps: DeviceCaps,
    pub squeezing_db: Vec<f64>,
    /// Microwave caps for the `D_a` sweep; one block of rows each.
    pub d_b_values: Vec<f64>,
    pub d_a_min: f64,
    pub d_a_max: f64,
    /// Points of the log-spaced `D_a` grid.
    pub points: usize,
    pub loss_db_min: f64,
    pub loss_db_max: f64,
    pub loss_db_step: f64,
    pub fiber_km: f64,
    pub loss_db_per_km: f64,
    pub bandwidth_hz: f64,
    /// Multiplies the draw counts of the validation suite.
    pub validation_scale: f64,
    pub seed: u64,
    /// Worker threads; results do not depend on it, so it stays out of
    /// the provenance header.
    #[serde(skip)]
    pub jobs: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn figure_caps(tau_a: f64, tau_b: f64, d_a: f64, d_b: f64) -> DeviceCaps {
    DeviceCaps { d_a, d_b, tau_a, tau_b, n_th: 0.0, rates: PhysicalRates::default() }
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            preset: None,
            caps: DeviceCaps::brubaker2022(),
            squeezing_db: vec![5.0],
            d_b_values: vec![1e-2, 1e2],
            d_a_min: 1e-2,
            d_a_max: 1e4,
            points: 201,
            loss_db_min: 0.0,
            loss_db_max: 10.0,
            loss_db_step: 0.05,
            fiber_km: 2.0,
            loss_db_per_km: 0.18,
            bandwidth_hz: 2000.0,
            validation_scale: 1.0,
            seed: DEFAULT_SEED,
            jobs: 1,
            out: None,
        };
        match experiment {
            Experiment::ThresholdVsDa => Self { caps: figure_caps(1.0, 0.75, 1.0, 1e-2), ..base },
            Experiment::ThresholdVsLoss => Self {
                caps: figure_caps(1.0, 1.0, 1000.0, 100.0),
                squeezing_db: vec![8.0],
                loss_db_max: 30.0,
                loss_db_step: 0.15,
                ..base
            },
            Experiment::DeviceRun => Self { preset: Some(PRESET_BRUBAKER2022.into()), squeezing_db: vec![3.0, 10.0], ..base },
            Experiment::EbitRate | Experiment::Validate => Self { preset: Some(PRESET_BRUBAKER2022.into()), ..base },
        }
    }

    /// Defaults, then the config file, then command-line overrides.
    pub fn resolve(experiment: Experiment, file: Option<&ConfigFile>, cli: &CliOverrides) -> Result<Self> {
        let mut cfg = Self::defaults(experiment);
        let empty = ConfigFile::default();
        let f = file.unwrap_or(&empty);
        if let Some(e) = f.experiment {
            if e != experiment {
                return Err(Error::Config(format!("config file is for {}, not {}", e.name(), experiment.name())));
            }
        }
        if let Some(p) = cli.preset.as_ref().or(f.preset.as_ref()) {
            cfg.apply_preset(p)?;
        }
        let caps = &mut cfg.caps;
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut caps.d_a, f.d_a);
        set(&mut caps.d_b, f.d_b);
        set(&mut caps.tau_a, f.tau_a);
        set(&mut caps.tau_b, f.tau_b);
        set(&mut caps.n_th, f.n_th);
        set(&mut caps.rates.kappa_a, f.kappa_a);
        set(&mut caps.rates.kappa_b, f.kappa_b);
        set(&mut caps.rates.gamma_m, f.gamma_m);
        set(&mut cfg.d_a_min, f.d_a_min);
        set(&mut cfg.d_a_max, f.d_a_max);
        set(&mut cfg.loss_db_min, f.loss_db_min);
        set(&mut cfg.loss_db_max, f.loss_db_max);
        set(&mut cfg.loss_db_step, f.loss_db_step);
        set(&mut cfg.fiber_km, f.fiber_km);
        set(&mut cfg.loss_db_per_km, f.loss_db_per_km);
        set(&mut cfg.bandwidth_hz, f.bandwidth_hz);
        set(&mut cfg.validation_scale, f.validation_scale);
        if let Some(v) = &f.squeezing_db {
            cfg.squeezing_db = v.clone();
        }
        if let Some(v) = &f.d_b_values {
            cfg.d_b_values = v.clone();
        }
        if let Some(v) = f.points {
            cfg.points = v;
        }
        cfg.seed = cli.seed.or(f.seed).unwrap_or(cfg.seed);
        cfg.jobs = cli.jobs.or(f.jobs).unwrap_or(cfg.jobs);
        cfg.out = cli.out.clone().or_else(|| f.out.clone());
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_preset(&mut self, name: &str) -> Result<()> {
        match name {
            PRESET_BRUBAKER2022 => {
                self.caps = DeviceCaps::brubaker2022();
                self.preset = Some(name.to_string());
                Ok(())
            }
            other => Err(Error::Config(format!("unknown preset {other:?}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        self.caps.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.squeezing_db.is_empty() || self.squeezing_db.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("squeezing_db must be a non-empty list of finite, non-negative values");
        }
        if self.d_b_values.is_empty() || self.d_b_values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("d_b_values must be a non-empty list of non-negative values");
        }
        if !(self.d_a_min > 0.0 && self.d_a_max >= self.d_a_min && self.d_a_max.is_finite()) {
            return bad("need 0 < d_a_min <= d_a_max");
        }
        if self.points == 0 {
            return bad("points must be positive");
        }
        if !(self.loss_db_min >= 0.0 && self.loss_db_max >= self.loss_db_min && self.loss_db_max.is_finite()) {
            return bad("need 0 <= loss_db_min <= loss_db_max");
        }
        if !(self.loss_db_step > 0.0 && self.loss_db_step.is_finite()) {
            return bad("loss_db_step must be positive");
        }
        for (name, v) in [("fiber_km", self.fiber_km), ("loss_db_per_km", self.loss_db_per_km), ("bandwidth_hz", self.bandwidth_hz)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and non-negative")));
            }
        }
        if !(self.validation_scale > 0.0 && self.validation_scale.is_finite()) {
            return bad("validation_scale must be positive");
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        Ok(())
    }

    /// Log-spaced `D_a` grid.
    pub fn d_a_grid(&self) -> Vec<f64> {
        log_grid(self.d_a_min, self.d_a_max, self.points)
    }

    /// Loss grid in dB, inclusive of both ends when the step divides the range.
    pub fn loss_db_grid(&self) -> Vec<f64> {
        let n = ((self.loss_db_max - self.loss_db_min) / self.loss_db_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.loss_db_min + i as f64 * self.loss_db_step).collect()
    }
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..points).map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64)).collect()
}

pub fn db_to_transmissivity(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}
