//! Thermal-noise thresholds and cooperativity optimisation.
//!
//! The optimiser minimises the partially transposed symplectic eigenvalue
//! `ν̃₋` instead of the log-negativity, which is flat at zero over the whole
//! separable region. Both share their maximisers wherever `E_N > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{nu_is_entangled, SqueezeParam, NU_TOL};
use crate::network::{mm_state, Cooperativities, LossSite, LossSplit, NetworkConfig, Role, Topology, TransducerCoops};
use crate::optimize::{minimize_unit_box, minimize_unit_box_from, SearchOptions};
use crate::sources::MoKind;
use crate::transducer::{stability_ok, DeviceCaps, DptParams, Pump, STABILITY_MARGIN};

/// Relative width at which threshold bisection stops.
pub const THRESHOLD_REL_TOL: f64 = 1e-10;

/// Everything that fixes a network except the cooperativities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub caps: DeviceCaps,
    pub r: SqueezeParam,
    pub tau_e: f64,
    pub split: LossSplit,
}

impl Scenario {
    pub fn lossless(caps: DeviceCaps, r: SqueezeParam) -> Self {
        Self { caps, r, tau_e: 1.0, split: LossSplit::none() }
    }

    pub fn with_loss(caps: DeviceCaps, r: SqueezeParam, tau_e: f64, split: LossSplit) -> Self {
        Self { caps, r, tau_e, split }
    }

    pub fn config(&self, coops: Cooperativities) -> NetworkConfig {
        NetworkConfig { caps: self.caps, coops, r: self.r, tau_e: self.tau_e, split: self.split }
    }

    fn validate(&self, t: &Topology) -> Result<()> {
        self.caps.validate()?;
        self.split.validate(t, self.tau_e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub coops: Cooperativities,
    pub nu: f64,
    pub log_negativity: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Largest cooperativity on the blue-pumped side that keeps a transducer
/// stable, given the red-side cooperativity. Both stability criteria are
/// linear in the blue cooperativity, so the bound is the smaller of the two
/// crossing points, nudged down until the margin-aware check accepts it.
fn stable_cap(caps: &DeviceCaps, blue_optical: bool, c_red: f64) -> f64 {
    let r = &caps.rates;
    let (k_plus, k_minus, d_plus) = if blue_optical {
        (r.kappa_a, r.kappa_b, caps.d_a)
    } else {
        (r.kappa_b, r.kappa_a, caps.d_b)
    };
    let g = r.gamma_m;
    let first = c_red + 1.0 - STABILITY_MARGIN;
    let second = (c_red * k_minus / (k_plus + g) + (k_plus + k_minus) / g - STABILITY_MARGIN) * (k_minus + g) / k_plus;
    let mut cap = d_plus.min(first).min(second).max(0.0);
    let params = |c: f64| {
        let (c_a, c_b) = if blue_optical { (c, c_red) } else { (c_red, c) };
        let (pa, pb) = if blue_optical { (Pump::Blue, Pump::Red) } else { (Pump::Red, Pump::Blue) };
        DptParams::converter(c_a, c_b, caps.tau_a, caps.tau_b, caps.n_th).with_pumps(pa, pb)
    };
    let mut step = f64::EPSILON * cap.max(1.0);
    while cap > 0.0 && !stability_ok(&params(cap), r).unwrap_or(false) {
        cap = (cap - step).max(0.0);
        step *= 2.0;
    }
    cap
}

/// `C̄_a`: the largest stable optical cooperativity with a blue optical pump.
pub fn max_stable_ca(caps: &DeviceCaps, c_b: f64) -> f64 {
    stable_cap(caps, true, c_b)
}

/// Largest stable microwave cooperativity with a blue microwave pump.
pub fn max_stable_cb(caps: &DeviceCaps, c_a: f64) -> f64 {
    stable_cap(caps, false, c_a)
}

/// Maps `u ∈ [0, 1]` onto `[0, max]` as `(1 + max)^u − 1`: linear for
/// cooperativities below one, logarithmic above. Optima often sit decades
/// below the cap, where a linear map would leave a sliver of the box.
fn warp(u: f64, max: f64) -> f64 {
    if u >= 1.0 {
        max
    } else {
        (u * max.ln_1p()).exp_m1().clamp(0.0, max)
    }
}

fn transducer_coops(role: Role, caps: &DeviceCaps, ua: f64, ub: f64) -> TransducerCoops {
    match role {
        Role::Source(MoKind::Io) => {
            let c_b = warp(ub, caps.d_b);
            TransducerCoops { c_a: warp(ua, max_stable_ca(caps, c_b)), c_b }
        }
        Role::Source(MoKind::Im) => {
            let c_a = warp(ua, caps.d_a);
            TransducerCoops { c_a, c_b: warp(ub, max_stable_cb(caps, c_a)) }
        }
        _ => TransducerCoops { c_a: warp(ua, caps.d_a), c_b: warp(ub, caps.d_b) },
    }
}

/// Search space in unit-box coordinates. Intrinsic sources are
/// reparameterised so that every box point satisfies the stability bound.
struct Space<'a> {
    t: Topology,
    scenario: &'a Scenario,
    mirrored: bool,
}

impl<'a> Space<'a> {
    fn new(t: Topology, scenario: &'a Scenario) -> Self {
        let s = &scenario.split;
        let mirrored = matches!(t, Topology::SwapSym(_)) && s.link[0] == s.link[1] && s.arm[0] == s.arm[1];
        Self { t, scenario, mirrored }
    }

    fn dim(&self) -> usize {
        if self.mirrored {
            2
        } else {
            4
        }
    }

    fn coops(&self, u: &[f64]) -> Cooperativities {
        let roles = self.t.roles();
        let caps = &self.scenario.caps;
        let first = transducer_coops(roles[0], caps, u[0], u[1]);
        if self.mirrored {
            Cooperativities::mirrored(first)
        } else {
            Cooperativities([first, transducer_coops(roles[1], caps, u[2], u[3])])
        }
    }

    fn nu(&self, u: &[f64]) -> f64 {
        match mm_state(&self.t, &self.scenario.config(self.coops(u))) {
            Ok(s) if s.is_finite() => s.min_sympl_eig_pt(),
            _ => f64::INFINITY,
        }
    }
}

fn search(t: &Topology, scenario: &Scenario, opts: &SearchOptions, warm: &[Vec<f64>]) -> Result<(Optimum, Vec<f64>)> {
    scenario.validate(t)?;
    let space = Space::new(*t, scenario);
    let res = if !warm.is_empty() {
        minimize_unit_box_from(space.dim(), |u| space.nu(u), opts, warm)
    } else if scenario.caps.n_th > 0.0 {
        // Near a threshold the entangled region shrinks to a sliver that
        // cold starts miss; the noiseless optimum usually sits in its basin.
        let cold = Scenario { caps: scenario.caps.with_n_th(0.0), ..*scenario };
        let seed = minimize_unit_box(space.dim(), |u| Space { scenario: &cold, ..space }.nu(u), &SearchOptions { starts: 4, polish_sweeps: 1, stop_below: None, ..*opts });
        minimize_unit_box_from(space.dim(), |u| space.nu(u), opts, &[seed.x])
    } else {
        minimize_unit_box(space.dim(), |u| space.nu(u), opts)
    };
    let coops = space.coops(&res.x);
    let state = mm_state(t, &scenario.config(coops))?;
    let nu = state.min_sympl_eig_pt();
    let opt = Optimum {
        coops,
        nu,
        log_negativity: state.log_negativity(),
        converged: res.converged,
        evaluations: res.evaluations,
    };
    Ok((opt, res.x))
}

/// Cooperativities maximising the final log-negativity within the device
/// envelope.
pub fn optimize_cooperativities(t: &Topology, scenario: &Scenario) -> Result<Optimum> {
    optimize_cooperativities_with(t, scenario, &SearchOptions::default())
}

pub fn optimize_cooperativities_with(t: &Topology, scenario: &Scenario, opts: &SearchOptions) -> Result<Optimum> {
    search(t, scenario, opts, &[]).map(|(o, _)| o)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Entangled iff `n_th < n_th_max`; zero when no occupancy works.
    pub n_th_max: f64,
    pub method: Method,
    pub argmax: Option<Cooperativities>,
    /// Some `n_th ≥ 0` gives entanglement.
    pub entangling: bool,
    pub converged: bool,
}

impl ThresholdResult {
    fn analytic(value: f64, argmax: Option<Cooperativities>) -> Self {
        Self { n_th_max: value.max(0.0), method: Method::Analytic, argmax, entangling: value > 0.0, converged: true }
    }
}

/// Closed-form threshold. EM topologies need the source cooperativities;
/// IO topologies use the supplied `C_b` (default `D_b`) to fix `C̄_a`.
pub fn analytic_threshold(
    t: &Topology,
    caps: &DeviceCaps,
    r: SqueezeParam,
    coops: Option<&Cooperativities>,
) -> Result<ThresholdResult> {
    caps.validate()?;
    let (ta, tb, da, db) = (caps.tau_a, caps.tau_b, caps.d_a, caps.d_b);
    let r = r.r();
    let src = coops.map(|c| c.0[0]);
    let em = |name| src.ok_or(Error::MissingCooperativities(name));
    let value = match *t {
        Topology::Down(MoKind::Eo) => ta * da * (1.0 - (-2.0 * r).exp()) / 2.0,
        Topology::SwapSym(MoKind::Eo) => ta * da * r.sinh().powi(2) / (2.0 * r).cosh(),
        Topology::Down(MoKind::Em) => {
            let TransducerCoops { c_a, c_b } = em("EM-down")?;
            4.0 * ta * ta * tb * c_a * c_b * da / ((1.0 + c_a + c_b).powi(2) + 4.0 * ta * ta * c_a * da)
        }
        Topology::SwapSym(MoKind::Em) => {
            let TransducerCoops { c_a, c_b } = em("EM-swap")?;
            tb * c_b - (1.0 + c_a + c_b).powi(2) / (8.0 * ta * c_a)
        }
        Topology::Down(MoKind::Io) | Topology::SwapSym(MoKind::Io) => {
            let cbar = max_stable_ca(caps, src.map_or(db, |c| c.c_b));
            if matches!(t, Topology::Down(_)) {
                ((cbar * (cbar + 4.0 * ta * ta * da)).sqrt() - cbar) / 2.0
            } else {
                (2.0 * ta - 1.0) * cbar
            }
        }
        Topology::Down(MoKind::Im) => (((1.0 + da).powi(2) + 4.0 * ta * ta * da * da).sqrt() - da - 1.0) / 2.0,
        Topology::SwapSym(MoKind::Im) => (2.0 * ta - 1.0) * da - 1.0,
        Topology::SwapAsym(..) => return Err(Error::Topology(format!("no closed-form threshold for {t}"))),
    };
    Ok(ThresholdResult::analytic(value, coops.copied()))
}

/// Largest `n` with `entangled(n)`, assuming the predicate holds on `[0, n*)`
/// and fails above. Returns `(n*, entangling)`.
fn bisect_threshold(upper: f64, mut entangled: impl FnMut(f64) -> Result<bool>) -> Result<(f64, bool)> {
    if !entangled(0.0)? {
        return Ok((0.0, false));
    }
    let mut hi = upper.max(f64::MIN_POSITIVE);
    let mut grow = 0;
    while entangled(hi)? {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::Config(format!("threshold not bracketed below {hi}")));
        }
    }
    let mut lo = 0.0;
    let floor = 1e-14 * upper.max(f64::MIN_POSITIVE);
    while hi - lo > THRESHOLD_REL_TOL * lo + floor {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, true))
}

/// Threshold by bisection over `n_th`, re-optimising the cooperativities at
/// every step. The bracket starts at `τ_a D_a`, which bounds every
/// topology.
pub fn numeric_threshold(t: &Topology, caps: &DeviceCaps, r: SqueezeParam) -> Result<ThresholdResult> {
    let scenario = Scenario::lossless(*caps, r);
    scenario.validate(t)?;
    let opts = SearchOptions { stop_below: Some(0.5 - NU_TOL), ..SearchOptions::default() };
    let mut warm: Vec<Vec<f64>> = Vec::new();
    let mut best: Option<Optimum> = None;
    let mut all_converged = true;
    let (n_max, entangling) = bisect_threshold(caps.tau_a * caps.d_a, |n| {
        let s = Scenario { caps: caps.with_n_th(n), ..scenario };
        let (opt, x) = search(t, &s, &opts, &warm)?;
        let ok = nu_is_entangled(opt.nu);
        if ok {
            warm = vec![x];
            best = Some(opt);
        } else {
            all_converged &= opt.converged;
        }
        Ok(ok)
    })?;
    Ok(ThresholdResult {
        n_th_max: n_max,
        method: Method::Numeric,
        argmax: best.filter(|_| entangling).map(|o| o.coops),
        entangling,
        converged: all_converged,
    })
}

/// Threshold by bisection over `n_th` with the cooperativities held fixed.
pub fn numeric_threshold_at(t: &Topology, caps: &DeviceCaps, r: SqueezeParam, coops: &Cooperativities) -> Result<ThresholdResult> {
    let (n_max, entangling) = bisect_threshold(caps.tau_a * caps.d_a, |n| {
        let cfg = NetworkConfig::lossless(caps.with_n_th(n), *coops, r);
        Ok(mm_state(t, &cfg)?.is_entangled())
    })?;
    Ok(ThresholdResult { n_th_max: n_max, method: Method::Numeric, argmax: Some(*coops), entangling, converged: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOptimum {
    pub split: LossSplit,
    pub optimum: Optimum,
}

fn stick_breaking(u: &[f64]) -> Vec<f64> {
    let mut rest = 1.0;
    let mut w = Vec::with_capacity(u.len() + 1);
    for &x in u {
        w.push(rest * x);
        rest *= 1.0 - x;
    }
    w.push(rest);
    w
}

/// Best placement of the external loss `tau_e` over the optical segments of
/// a topology, with cooperativities optimised for each candidate.
///
/// Down topologies with a single optical segment have nothing to choose.
/// EO down uses the equal split. Symmetric swaps put all loss on one
/// segment, comparing the distinct kinds of segment; EO swaps also try
/// splitting it evenly over both arms. Asymmetric swaps search
/// the simplex of loss exponents numerically.
pub fn optimize_loss_split(t: &Topology, caps: &DeviceCaps, r: SqueezeParam, tau_e: f64) -> Result<SplitOptimum> {
    let eval = |split: LossSplit, opts: &SearchOptions| -> Result<SplitOptimum> {
        let optimum = optimize_cooperativities_with(t, &Scenario::with_loss(*caps, r, tau_e, split), opts)?;
        Ok(SplitOptimum { split, optimum })
    };
    let full = SearchOptions::default();
    match *t {
        Topology::Down(_) => eval(LossSplit::equal(t, tau_e), &full),
        Topology::SwapSym(k) => {
            let mut splits = vec![LossSplit::all_on(t, LossSite::Link(1), tau_e)?];
            if k == MoKind::Eo {
                // Sharing loss between the two unmeasured arms can beat both extremes.
                splits.push(LossSplit::all_on(t, LossSite::Arm(1), tau_e)?);
                splits.push(LossSplit::equal(t, tau_e));
            }
            let mut best: Option<SplitOptimum> = None;
            for split in splits {
                let cand = eval(split, &full)?;
                if best.is_none_or(|b| cand.optimum.nu < b.optimum.nu) {
                    best = Some(cand);
                }
            }
            Ok(best.expect("at least one site"))
        }
        Topology::SwapAsym(..) => {
            let sites = t.loss_sites();
            let inner = SearchOptions { starts: 6, polish_sweeps: 1, ..SearchOptions::default() };
            let outer = SearchOptions { starts: 3, max_iter_per_dim: 30, x_tol: 1e-4, f_tol: 1e-12, polish_sweeps: 1, stop_below: None };
            let objective = |u: &[f64]| -> f64 {
                LossSplit::from_weights(t, tau_e, &stick_breaking(u))
                    .and_then(|s| eval(s, &inner))
                    .map_or(f64::INFINITY, |o| o.optimum.nu)
            };
            let res = minimize_unit_box(sites.len() - 1, objective, &outer);
            eval(LossSplit::from_weights(t, tau_e, &stick_breaking(&res.x))?, &full)
        }
    }
}
