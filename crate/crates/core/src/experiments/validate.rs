//! Randomised property and oracle checks behind `gausslink validate`.
//!
//! Every check draws its parameters from its own ChaCha8 stream: the key is
//! the run seed, the stream id is the check's index. Draws are generated
//! sequentially and evaluated in parallel, so results do not depend on the
//! thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::output::TOOL_VERSION;
use super::sweeps::par_map;
use crate::error::Result;
use crate::gaussian::{physicality_check, BalancedForm, OneModeChannel, SqueezeParam};
use crate::network::{mm_state, swap, Cooperativities, LossSplit, NetworkConfig, Role, Topology};
use crate::sources::{mo_state, mo_state_via_composition, MoKind};
use crate::thresholds::{analytic_threshold, max_stable_ca, max_stable_cb, numeric_threshold, optimize_cooperativities, Scenario};
use crate::transducer::{conversion_channel, traced_conversion_channel, DeviceCaps, Direction, PhysicalRates, Pump};

pub type SwapFn = fn(&BalancedForm, &BalancedForm) -> BalancedForm;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub draws: usize,
    pub failures: usize,
    /// Largest violation seen, in the check's own units.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// First failing draw, for replay.
    pub counterexample: Option<Value>,
}

impl CheckResult {
    fn collect(name: &str, tolerance: f64, outcomes: Vec<(f64, Value)>) -> Self {
        let draws = outcomes.len();
        let mut worst = 0.0f64;
        let mut failures = 0;
        let mut counterexample = None;
        for (excess, draw) in outcomes {
            worst = worst.max(excess);
            // NaN counts as a failure.
            if excess.is_nan() || excess > tolerance {
                failures += 1;
                counterexample.get_or_insert(draw);
            }
        }
        Self { name: name.into(), draws, failures, worst, tolerance, passed: failures == 0, counterexample }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo.log10()..=hi.log10()))
}

/// A physical balanced state with `a, b ∈ [½, 10³]` and a random share of
/// the largest admissible correlation.
pub fn random_physical_state(rng: &mut impl Rng) -> BalancedForm {
    let a = 0.5 * log_uniform(rng, 1.0, 2e3);
    let b = 0.5 * log_uniform(rng, 1.0, 2e3);
    // Smallest symplectic eigenvalue of V is ≥ ½ iff
    // c² ≤ ((a+b)² − (1+|a−b|)²)/4.
    let c_max = (((a + b).powi(2) - (1.0 + (a - b).abs()).powi(2)) / 4.0).max(0.0).sqrt();
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    BalancedForm::new(a, b, sign * c_max * rng.gen::<f64>())
}

fn state_json(s: &BalancedForm) -> Value {
    json!({"a": s.a(), "b": s.b(), "c": s.c()})
}

/// Swapping two different sources never beats the better of the two
/// symmetric swaps.
pub fn theorem_sweep(seed: u64, pairs: usize, jobs: usize, swap_fn: SwapFn) -> Result<CheckResult> {
    let mut rng = rng_for(seed, 0);
    let draws: Vec<(BalancedForm, BalancedForm)> =
        (0..pairs).map(|_| (random_physical_state(&mut rng), random_physical_state(&mut rng))).collect();
    let outcomes = par_map(jobs, &draws, |(s1, s2)| {
        let e12 = swap_fn(s1, s2).log_negativity();
        let best = swap_fn(s1, s1).log_negativity().max(swap_fn(s2, s2).log_negativity());
        Ok((e12 - best, json!({"state1": state_json(s1), "state2": state_json(s2)})))
    })?;
    Ok(CheckResult::collect("asymmetric swap bounded by symmetric swaps", 1e-12, outcomes))
}

/// Random operating point for a source kind, stable for the intrinsic ones.
fn random_source(rng: &mut impl Rng, kind: MoKind) -> (DeviceCaps, f64, f64, SqueezeParam) {
    let caps = DeviceCaps {
        d_a: 1e4,
        d_b: 1e4,
        tau_a: rng.gen_range(0.01..=1.0),
        tau_b: rng.gen_range(0.01..=1.0),
        n_th: log_uniform(rng, 1e-3, 1e3) - 1e-3,
        rates: PhysicalRates::default(),
    };
    let r = SqueezeParam::new(rng.gen_range(0.0..=1.5)).expect("non-negative");
    let (mut ca, mut cb) = (log_uniform(rng, 1e-2, 1e3), log_uniform(rng, 1e-2, 1e3));
    match kind {
        MoKind::Io => ca = rng.gen::<f64>() * max_stable_ca(&caps, cb),
        MoKind::Im => cb = rng.gen::<f64>() * max_stable_cb(&caps, ca),
        _ => {}
    }
    (caps, ca, cb, r)
}

/// Largest entry difference over the largest entry magnitude.
pub fn state_mismatch(x: &BalancedForm, y: &BalancedForm) -> f64 {
    let scale = [x.a(), x.b(), x.c().abs(), y.a(), y.b(), y.c().abs()].into_iter().fold(0.0, f64::max);
    let diff = [(x.a() - y.a()).abs(), (x.b() - y.b()).abs(), (x.c() - y.c()).abs()].into_iter().fold(0.0, f64::max);
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Closed-form source states against channel composition.
pub fn source_oracle(seed: u64, draws: usize, jobs: usize) -> Result<CheckResult> {
    let mut rng = rng_for(seed, 1);
    let items: Vec<_> = (0..draws)
        .map(|i| {
            let kind = MoKind::ALL[i % 4];
            (kind, random_source(&mut rng, kind))
        })
        .collect();
    let outcomes = par_map(jobs, &items, |(kind, (caps, ca, cb, r))| {
        let (pa, pb) = kind.pumps();
        let p = caps.params(*ca, *cb, pa, pb);
        let x = mo_state(*kind, &p, *r, &caps.rates)?;
        let y = mo_state_via_composition(*kind, &p, *r, &caps.rates)?;
        Ok((state_mismatch(&x, &y), json!({"kind": kind, "params": p, "r": r.r()})))
    })?;
    Ok(CheckResult::collect("source closed forms match channel composition", 1e-12, outcomes))
}

fn channel_mismatch(x: &OneModeChannel, y: &OneModeChannel) -> f64 {
    let scale = x.t().abs().max().max(x.n().abs().max()).max(y.t().abs().max()).max(y.n().abs().max());
    let diff = (x.t() - y.t()).abs().max().max((x.n() - y.n()).abs().max());
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Closed-form conversion channels against the traced two-mode channel.
pub fn conversion_oracle(seed: u64, draws: usize, jobs: usize) -> Result<CheckResult> {
    let mut rng = rng_for(seed, 2);
    let items: Vec<_> = (0..draws).map(|_| random_source(&mut rng, MoKind::Eo)).collect();
    let outcomes = par_map(jobs, &items, |(caps, ca, cb, _)| {
        let p = caps.params(*ca, *cb, Pump::Red, Pump::Red);
        let mut worst = 0.0f64;
        for dir in [Direction::Down, Direction::Up] {
            worst = worst.max(channel_mismatch(&conversion_channel(dir, &p)?, &traced_conversion_channel(dir, &p)?));
        }
        Ok((worst, json!({"params": p})))
    })?;
    Ok(CheckResult::collect("conversion channel matches traced two-mode channel", 1e-12, outcomes))
}

/// Random device caps in the ranges used for the threshold comparison.
pub fn random_caps(rng: &mut impl Rng) -> (DeviceCaps, SqueezeParam) {
    let caps = DeviceCaps {
        d_a: log_uniform(rng, 1e-2, 1e4),
        d_b: log_uniform(rng, 1e-2, 1e3),
        tau_a: rng.gen_range(0.5..=1.0),
        tau_b: rng.gen_range(0.5..=1.0),
        n_th: 0.0,
        rates: PhysicalRates::default(),
    };
    (caps, SqueezeParam::new(rng.gen_range(0.0..=1.2)).expect("non-negative"))
}

/// Topologies with a closed-form optimised threshold.
pub fn closed_form_topologies() -> [Topology; 6] {
    [
        Topology::Down(MoKind::Eo),
        Topology::SwapSym(MoKind::Eo),
        Topology::Down(MoKind::Im),
        Topology::SwapSym(MoKind::Im),
        Topology::Down(MoKind::Io),
        Topology::SwapSym(MoKind::Io),
    ]
}

/// Relative gap between two thresholds; zero when both vanish.
pub fn relative_gap(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

/// Closed-form thresholds against bisection on the optimised state.
pub fn threshold_agreement(seed: u64, draws: usize, jobs: usize) -> Result<CheckResult> {
    let mut rng = rng_for(seed, 3);
    let items: Vec<_> = (0..draws).map(|_| random_caps(&mut rng)).collect();
    let outcomes = par_map(jobs, &items, |(caps, r)| {
        let mut worst = (0.0f64, Value::Null);
        for t in closed_form_topologies() {
            let a = analytic_threshold(&t, caps, *r, None)?.n_th_max;
            let n = numeric_threshold(&t, caps, *r)?.n_th_max;
            let gap = relative_gap(a, n);
            if gap >= worst.0 {
                worst = (gap, json!({"topology": t.label(), "caps": caps, "r": r.r(), "analytic": a, "numeric": n}));
            }
        }
        Ok(worst)
    })?;
    Ok(CheckResult::collect("closed-form thresholds match bisection", 1e-6, outcomes))
}

/// Random caps with `n_th ≥ τ_a D_a`.
pub fn random_hot_caps(rng: &mut impl Rng) -> (DeviceCaps, SqueezeParam) {
    let (mut caps, r) = random_caps(rng);
    caps.n_th = caps.tau_a * caps.d_a * (1.0 + rng.gen::<f64>());
    (caps, r)
}

/// No symmetric topology entangles once `n_th ≥ τ_a D_a`.
pub fn global_necessary_condition(seed: u64, draws: usize, jobs: usize) -> Result<CheckResult> {
    let mut rng = rng_for(seed, 4);
    let items: Vec<_> = (0..draws).map(|_| random_hot_caps(&mut rng)).collect();
    let outcomes = par_map(jobs, &items, |(caps, r)| {
        let mut worst = (0.0f64, Value::Null);
        for t in Topology::symmetric() {
            let e = optimize_cooperativities(&t, &Scenario::lossless(*caps, *r))?.log_negativity;
            if e > worst.0 {
                worst = (e, json!({"topology": t.label(), "caps": caps, "r": r.r()}));
            }
        }
        Ok(worst)
    })?;
    Ok(CheckResult::collect("no entanglement once n_th reaches tau_a D_a", 0.0, outcomes))
}

/// `ν` with optimised cooperativities at each point of a 101-point grid of
/// loss exponents `w ∈ [0, 1]`, `τ_e^w` on the first segment and
/// `τ_e^(1−w)` on the second.
pub fn split_grid(t: &Topology, caps: &DeviceCaps, r: SqueezeParam, tau_e: f64) -> Result<Vec<f64>> {
    let n_sites = t.loss_sites().len();
    (0..=100)
        .map(|i| {
            let w = i as f64 / 100.0;
            let mut weights = vec![0.0; n_sites];
            weights[0] = w;
            weights[1] = 1.0 - w;
            let split = LossSplit::from_weights(t, tau_e, &weights)?;
            Ok(optimize_cooperativities(t, &Scenario::with_loss(*caps, r, tau_e, split))?.nu)
        })
        .collect()
}

/// Random lossy scenario for the split checks.
pub fn random_split_draw(rng: &mut impl Rng) -> (DeviceCaps, SqueezeParam, f64) {
    let (mut caps, r) = random_caps(rng);
    caps.n_th = rng.gen::<f64>() * 0.2 * caps.tau_a * caps.d_a;
    (caps, r, rng.gen_range(0.05..=0.95))
}

/// Grid slack allowed for optimiser noise in `ν`.
pub const SPLIT_NU_TOL: f64 = 1e-9;

/// Equal split is optimal for EO downconversion.
pub fn equal_split_optimal(seed: u64, draws: usize, jobs: usize) -> Result<CheckResult> {
    let mut rng = rng_for(seed, 5);
    let items: Vec<_> = (0..draws).map(|_| random_split_draw(&mut rng)).collect();
    let t = Topology::Down(MoKind::Eo);
    let outcomes = par_map(jobs, &items, |(caps, r, tau_e)| {
        let grid = split_grid(&t, caps, *r, *tau_e)?;
        let best = grid.iter().copied().fold(f64::INFINITY, f64::min);
        Ok((grid[50] - best, json!({"caps": caps, "r": r.r(), "tau_e": tau_e})))
    })?;
    Ok(CheckResult::collect("equal split optimal for EO downconversion", SPLIT_NU_TOL, outcomes))
}

/// All loss on one measured link is optimal for symmetric swapping.
pub fn extremal_split_optimal(seed: u64, draws: usize, jobs: usize) -> Result<CheckResult> {
    let mut rng = rng_for(seed, 6);
    let items: Vec<_> = (0..draws).map(|i| (MoKind::ALL[i % 4], random_split_draw(&mut rng))).collect();
    let outcomes = par_map(jobs, &items, |(kind, (caps, r, tau_e))| {
        let t = Topology::SwapSym(*kind);
        let grid = split_grid(&t, caps, *r, *tau_e)?;
        let best = grid.iter().copied().fold(f64::INFINITY, f64::min);
        Ok((grid[0].min(grid[100]) - best, json!({"topology": t.label(), "caps": caps, "r": r.r(), "tau_e": tau_e})))
    })?;
    Ok(CheckResult::collect("extremal split optimal for symmetric swapping", SPLIT_NU_TOL, outcomes))
}

/// Every topology yields a physical state at random operating points.
pub fn physicality(seed: u64, draws: usize, jobs: usize) -> Result<CheckResult> {
    let mut rng = rng_for(seed, 7);
    let all = Topology::all();
    let items: Vec<_> = (0..draws)
        .map(|i| {
            let t = all[i % all.len()];
            let (mut caps, r, tau_e) = random_split_draw(&mut rng);
            caps.n_th = log_uniform(&mut rng, 1e-3, 1e3) - 1e-3;
            let mut c = [0.0; 4];
            for (j, role) in t.roles().iter().enumerate() {
                let (ua, ub) = (rng.gen::<f64>(), rng.gen::<f64>());
                let (ca, cb) = match role {
                    Role::Source(MoKind::Io) => {
                        let cb = ub * caps.d_b;
                        (ua * max_stable_ca(&caps, cb), cb)
                    }
                    Role::Source(MoKind::Im) => {
                        let ca = ua * caps.d_a;
                        (ca, ub * max_stable_cb(&caps, ca))
                    }
                    _ => (ua * caps.d_a, ub * caps.d_b),
                };
                c[2 * j] = ca;
                c[2 * j + 1] = cb;
            }
            let coops = Cooperativities::new(c[0], c[1], c[2], c[3]);
            (t, NetworkConfig { caps, coops, r, tau_e, split: LossSplit::equal(&t, tau_e) })
        })
        .collect();
    let outcomes = par_map(jobs, &items, |(t, cfg)| {
        let s = mm_state(t, cfg)?;
        let bad = if physicality_check(&s.to_cov()) { 0.0 } else { 1.0 };
        Ok((bad, json!({"topology": t.label(), "config": cfg})))
    })?;
    Ok(CheckResult::collect("network states are physical", 0.0, outcomes))
}

/// Draw counts at scale 1.
pub const THEOREM_PAIRS: usize = 100_000;
pub const ORACLE_DRAWS: usize = 10_000;
pub const THRESHOLD_DRAWS: usize = 200;
pub const HOT_DRAWS: usize = 10_000;
pub const SPLIT_DRAWS: usize = 50;
pub const PHYSICALITY_DRAWS: usize = 2_000;

fn scaled(n: usize, scale: f64) -> usize {
    ((n as f64 * scale).round() as usize).max(1)
}

pub fn run_validation(cfg: &ExperimentConfig) -> Result<ValidationReport> {
    run_validation_with(cfg, swap)
}

/// Full suite with a replaceable swap formula, for mutation testing.
pub fn run_validation_with(cfg: &ExperimentConfig, swap_fn: SwapFn) -> Result<ValidationReport> {
    let (seed, jobs, k) = (cfg.seed, cfg.jobs, cfg.validation_scale);
    let checks = vec![
        theorem_sweep(seed, scaled(THEOREM_PAIRS, k), jobs, swap_fn)?,
        source_oracle(seed, scaled(ORACLE_DRAWS, k), jobs)?,
        conversion_oracle(seed, scaled(ORACLE_DRAWS, k), jobs)?,
        threshold_agreement(seed, scaled(THRESHOLD_DRAWS, k), jobs)?,
        global_necessary_condition(seed, scaled(HOT_DRAWS, k), jobs)?,
        equal_split_optimal(seed, scaled(SPLIT_DRAWS, k), jobs)?,
        extremal_split_optimal(seed, scaled(SPLIT_DRAWS, k), jobs)?,
        physicality(seed, scaled(PHYSICALITY_DRAWS, k), jobs)?,
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { tool: "gausslink", version: TOOL_VERSION, seed, checks, passed })
}
