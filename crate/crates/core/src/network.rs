//! Two-node networks that end in a shared microwave–microwave state.
//!
//! A *down* topology sends the optical half of one source to the second
//! node, where a red–red transducer converts it to microwave. A *swap*
//! topology builds one source per node and performs a Bell measurement on
//! the two optical halves.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{loss_channel, BalancedForm, OneModeChannel, SqueezeParam};
use crate::sources::{mo_state, MoKind};
use crate::transducer::{conversion_channel, fold_external_loss, DeviceCaps, Direction, Pump};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    Down(MoKind),
    SwapSym(MoKind),
    /// Unordered pair of distinct kinds, stored in ascending order.
    SwapAsym(MoKind, MoKind),
}

/// What a transducer does inside a topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source(MoKind),
    Converter,
}

impl Topology {
    pub fn swap_asym(k1: MoKind, k2: MoKind) -> Result<Self> {
        if k1 == k2 {
            return Err(Error::Topology(format!("asymmetric swap needs two different kinds, got {k1} twice")));
        }
        Ok(Topology::SwapAsym(k1.min(k2), k1.max(k2)))
    }

    /// The eight single-kind topologies, down before swap for each kind.
    pub fn symmetric() -> [Topology; 8] {
        let mut out = [Topology::Down(MoKind::Eo); 8];
        for (i, k) in MoKind::ALL.into_iter().enumerate() {
            out[2 * i] = Topology::Down(k);
            out[2 * i + 1] = Topology::SwapSym(k);
        }
        out
    }

    /// All fourteen topologies.
    pub fn all() -> Vec<Topology> {
        let mut out = Topology::symmetric().to_vec();
        for (i, &k1) in MoKind::ALL.iter().enumerate() {
            for &k2 in &MoKind::ALL[i + 1..] {
                out.push(Topology::SwapAsym(k1, k2));
            }
        }
        out
    }

    pub fn label(&self) -> String {
        match self {
            Topology::Down(k) => format!("{k}-down"),
            Topology::SwapSym(k) => format!("{k}-swap"),
            Topology::SwapAsym(k1, k2) => format!("{k1}+{k2}-swap"),
        }
    }

    pub fn roles(&self) -> [Role; 2] {
        match *self {
            Topology::Down(k) => [Role::Source(k), Role::Converter],
            Topology::SwapSym(k) => [Role::Source(k), Role::Source(k)],
            Topology::SwapAsym(k1, k2) => [Role::Source(k1), Role::Source(k2)],
        }
    }

    pub fn is_swap(&self) -> bool {
        !matches!(self, Topology::Down(_))
    }

    pub fn uses_squeezing(&self) -> bool {
        self.roles().iter().any(|r| matches!(r, Role::Source(k) if k.uses_squeezing()))
    }

    /// Optical segments where external loss can sit.
    pub fn loss_sites(&self) -> Vec<LossSite> {
        match *self {
            Topology::Down(MoKind::Eo) => vec![LossSite::Link(1), LossSite::Arm(1)],
            Topology::Down(_) => vec![LossSite::Link(1)],
            _ => {
                let mut out = vec![LossSite::Link(1), LossSite::Link(2)];
                for (i, role) in self.roles().iter().enumerate() {
                    if *role == Role::Source(MoKind::Eo) {
                        out.push(LossSite::Arm(i + 1));
                    }
                }
                out
            }
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Topology::all()
            .into_iter()
            .find(|t| t.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Topology(format!("unknown topology {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TransducerCoops {
    pub c_a: f64,
    pub c_b: f64,
}

/// Cooperativities of transducer 1 and transducer 2.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cooperativities(pub [TransducerCoops; 2]);

impl Cooperativities {
    pub fn new(c_a1: f64, c_b1: f64, c_a2: f64, c_b2: f64) -> Self {
        Self([TransducerCoops { c_a: c_a1, c_b: c_b1 }, TransducerCoops { c_a: c_a2, c_b: c_b2 }])
    }

    pub fn mirrored(c: TransducerCoops) -> Self {
        Self([c, c])
    }

    /// `(C_a1, C_b1, C_a2, C_b2)`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.0[0].c_a, self.0[0].c_b, self.0[1].c_a, self.0[1].c_b]
    }

    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// An optical segment carrying part of the external loss. Indices are the
/// transducer (1 or 2) the segment belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossSite {
    /// The optical mode leaving a source: into the converting node for a
    /// down topology, into the Bell measurement for a swap.
    Link(usize),
    /// The squeezed arm an EO source converts to microwave.
    Arm(usize),
}

impl fmt::Display for LossSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossSite::Link(i) => write!(f, "link{i}"),
            LossSite::Arm(i) => write!(f, "arm{i}"),
        }
    }
}

/// Transmissivity assigned to each loss site; unused sites stay at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSplit {
    pub link: [f64; 2],
    pub arm: [f64; 2],
}

impl Default for LossSplit {
    fn default() -> Self {
        Self::none()
    }
}

impl LossSplit {
    pub fn none() -> Self {
        Self { link: [1.0; 2], arm: [1.0; 2] }
    }

    fn slot(&mut self, site: LossSite) -> Result<&mut f64> {
        match site {
            LossSite::Link(i @ 1..=2) => Ok(&mut self.link[i - 1]),
            LossSite::Arm(i @ 1..=2) => Ok(&mut self.arm[i - 1]),
            LossSite::Link(i) | LossSite::Arm(i) => Err(Error::InvalidMode(i)),
        }
    }

    pub fn get(&self, site: LossSite) -> Result<f64> {
        let mut copy = *self;
        copy.slot(site).map(|v| *v)
    }

    pub fn set(&mut self, site: LossSite, tau: f64) -> Result<()> {
        *self.slot(site)? = tau;
        Ok(())
    }

    /// All loss on one site.
    pub fn all_on(t: &Topology, site: LossSite, tau_e: f64) -> Result<Self> {
        if !t.loss_sites().contains(&site) {
            return Err(Error::Topology(format!("{t} has no loss site {site}")));
        }
        let mut s = Self::none();
        s.set(site, tau_e)?;
        Ok(s)
    }

    /// `tau_e^{w_i}` on each site for weights `w` summing to 1.
    pub fn from_weights(t: &Topology, tau_e: f64, weights: &[f64]) -> Result<Self> {
        let sites = t.loss_sites();
        if weights.len() != sites.len() {
            return Err(Error::Topology(format!("{t} has {} loss sites, got {} weights", sites.len(), weights.len())));
        }
        let mut s = Self::none();
        for (site, w) in sites.into_iter().zip(weights) {
            s.set(site, tau_e.powf(*w))?;
        }
        Ok(s)
    }

    /// Each transducer's optical port sees `sqrt(tau_e)`. A down topology
    /// with a single optical segment carries all of `tau_e` on it.
    pub fn equal(t: &Topology, tau_e: f64) -> Self {
        let half = tau_e.sqrt();
        let mut s = Self::none();
        match *t {
            Topology::Down(MoKind::Eo) => {
                s.link[0] = half;
                s.arm[0] = half;
            }
            Topology::Down(_) => s.link[0] = tau_e,
            _ => {
                for (i, role) in t.roles().iter().enumerate() {
                    if *role == Role::Source(MoKind::Eo) {
                        s.arm[i] = half;
                    } else {
                        s.link[i] = half;
                    }
                }
            }
        }
        s
    }

    pub fn product(&self) -> f64 {
        self.link[0] * self.link[1] * self.arm[0] * self.arm[1]
    }

    pub fn validate(&self, t: &Topology, tau_e: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&tau_e) {
            return Err(Error::Transmissivity(tau_e));
        }
        let sites = t.loss_sites();
        for site in [LossSite::Link(1), LossSite::Link(2), LossSite::Arm(1), LossSite::Arm(2)] {
            let v = self.get(site)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Transmissivity(v));
            }
            if !sites.contains(&site) && v != 1.0 {
                return Err(Error::Topology(format!("{t} has no loss site {site}")));
            }
        }
        let product = self.product();
        if (product - tau_e).abs() > 1e-12 * tau_e.max(1e-300).max(product) {
            return Err(Error::LossSplit { product, expected: tau_e });
        }
        Ok(())
    }

    /// Shares folded into each transducer's optical port, followed by the
    /// free-space losses left on the measured arm of each EO swap source.
    fn partition(&self, t: &Topology) -> ([f64; 2], [f64; 2]) {
        match *t {
            Topology::Down(MoKind::Eo) => ([self.arm[0], self.link[0]], [1.0; 2]),
            Topology::Down(_) => ([1.0, self.link[0]], [1.0; 2]),
            _ => {
                let roles = t.roles();
                let mut folded = [1.0; 2];
                let mut free = [1.0; 2];
                for i in 0..2 {
                    if roles[i] == Role::Source(MoKind::Eo) {
                        folded[i] = self.arm[i];
                        free[i] = self.link[i];
                    } else {
                        folded[i] = self.link[i];
                    }
                }
                (folded, free)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub caps: DeviceCaps,
    pub coops: Cooperativities,
    pub r: SqueezeParam,
    pub tau_e: f64,
    pub split: LossSplit,
}

impl NetworkConfig {
    /// No external loss.
    pub fn lossless(caps: DeviceCaps, coops: Cooperativities, r: SqueezeParam) -> Self {
        Self { caps, coops, r, tau_e: 1.0, split: LossSplit::none() }
    }
}

/// Downconverts the optical mode (mode 1) of `mo`.
pub fn downconvert_mm(mo: &BalancedForm, conv: &OneModeChannel) -> Result<BalancedForm> {
    mo.through(conv, 1)
}

/// Homodyne Bell measurement on the optical modes (mode 1) of two sources.
/// The result holds the microwave mode of `mo1` on mode 1 and that of `mo2`
/// on mode 2.
pub fn swap(mo1: &BalancedForm, mo2: &BalancedForm) -> BalancedForm {
    let (a1, b1, c1, d1) = (mo1.a(), mo1.b(), mo1.c(), mo1.det());
    let (a2, b2, c2, d2) = (mo2.a(), mo2.b(), mo2.c(), mo2.det());
    let s = a1 + a2;
    // b1 - c1²/s = (det1 + b1·a2)/s, and likewise for the other entries.
    BalancedForm::with_det((d1 + b1 * a2) / s, (d2 + b2 * a1) / s, -c1 * c2 / s, (b2 * d1 + b1 * d2) / s)
}

fn check_coops(caps: &DeviceCaps, coops: &Cooperativities) -> Result<()> {
    let slack = 1.0 + 1e-12;
    for tc in coops.0 {
        for (name, v, max) in [("c_a", tc.c_a, caps.d_a), ("c_b", tc.c_b, caps.d_b)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parameter { name, value: v });
            }
            if v > max * slack {
                return Err(Error::CooperativityBound { name, value: v, max });
            }
        }
    }
    Ok(())
}

/// Final microwave–microwave state of a topology.
pub fn mm_state(t: &Topology, cfg: &NetworkConfig) -> Result<BalancedForm> {
    cfg.caps.validate()?;
    check_coops(&cfg.caps, &cfg.coops)?;
    cfg.split.validate(t, cfg.tau_e)?;
    let (folded, free) = cfg.split.partition(t);
    let caps = fold_external_loss(&cfg.caps, folded[0] * folded[1], folded)?;
    let roles = t.roles();
    let mut mo = [BalancedForm::vacuum(); 2];
    for i in 0..2 {
        if let Role::Source(k) = roles[i] {
            let (pa, pb) = k.pumps();
            let TransducerCoops { c_a, c_b } = cfg.coops.0[i];
            let s = mo_state(k, &caps[i].params(c_a, c_b, pa, pb), cfg.r, &caps[i].rates)?;
            mo[i] = if free[i] < 1.0 { s.through(&loss_channel(free[i])?, 1)? } else { s };
        }
    }
    match roles[1] {
        Role::Converter => {
            let TransducerCoops { c_a, c_b } = cfg.coops.0[1];
            let conv = conversion_channel(Direction::Down, &caps[1].params(c_a, c_b, Pump::Red, Pump::Red))?;
            downconvert_mm(&mo[0], &conv)
        }
        Role::Source(_) => Ok(swap(&mo[0], &mo[1])),
    }
}

pub fn mm_log_negativity(t: &Topology, cfg: &NetworkConfig) -> Result<f64> {
    Ok(mm_state(t, cfg)?.log_negativity())
}
