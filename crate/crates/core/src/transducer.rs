//! Double-pumped electro-optomechanical transducer in the adiabatic limit.
//!
//! A transducer couples an optical cavity `a` and a microwave cavity `b`
//! through a shared mechanical mode. Each cavity is pumped on the red
//! (beam-splitter) or blue (two-mode squeezing) sideband of the mechanics.
//! Both pumps red gives frequency conversion; one pump blue gives an
//! intrinsic microwave–optical entanglement source.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{OneModeChannel, TwoModeChannel};

/// Slack applied to every strict stability inequality.
pub const STABILITY_MARGIN: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pump {
    Red,
    Blue,
}

impl Pump {
    /// `σ = -1` on the red sideband, `+1` on the blue one.
    pub fn sign(self) -> f64 {
        match self {
            Pump::Red => -1.0,
            Pump::Blue => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Microwave to optical.
    Up,
    /// Optical to microwave.
    Down,
}

/// Operating point of one transducer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DptParams {
    pub c_a: f64,
    pub c_b: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub n_th: f64,
    pub pump_a: Pump,
    pub pump_b: Pump,
}

impl DptParams {
    /// Both pumps red.
    pub fn converter(c_a: f64, c_b: f64, tau_a: f64, tau_b: f64, n_th: f64) -> Self {
        Self { c_a, c_b, tau_a, tau_b, n_th, pump_a: Pump::Red, pump_b: Pump::Red }
    }

    pub fn with_pumps(mut self, pump_a: Pump, pump_b: Pump) -> Self {
        self.pump_a = pump_a;
        self.pump_b = pump_b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_a", self.c_a), ("c_b", self.c_b), ("n_th", self.n_th)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parameter { name, value: v });
            }
        }
        for tau in [self.tau_a, self.tau_b] {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::Transmissivity(tau));
            }
        }
        if self.pump_a == Pump::Blue && self.pump_b == Pump::Blue {
            return Err(Error::BothPumpsBlue);
        }
        Ok(())
    }

    fn is_converter(&self) -> bool {
        self.pump_a == Pump::Red && self.pump_b == Pump::Red
    }
}

/// Cavity decay rates and mechanical damping, in any common unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalRates {
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub gamma_m: f64,
}

impl Default for PhysicalRates {
    /// Sideband-resolved, adiabatic regime: `κ_a = κ_b = 100 γ_m`.
    fn default() -> Self {
        Self { kappa_a: 100.0, kappa_b: 100.0, gamma_m: 1.0 }
    }
}

impl PhysicalRates {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa_a", self.kappa_a), ("kappa_b", self.kappa_b), ("gamma_m", self.gamma_m)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Parameter { name, value: v });
            }
        }
        Ok(())
    }
}

/// Hardware envelope: maximal cooperativities and transmissivities and the
/// minimal bath occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceCaps {
    pub d_a: f64,
    pub d_b: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub n_th: f64,
    #[serde(default)]
    pub rates: PhysicalRates,
}

impl DeviceCaps {
    /// Piezo-optomechanical device with coupling, input and output port
    /// efficiencies folded into `tau_a` and `tau_b`.
    pub fn brubaker2022() -> Self {
        Self {
            d_a: 26000.0,
            d_b: 124.0,
            tau_a: 0.791 * 0.88,
            tau_b: 0.866 * 0.34,
            n_th: 1000.0,
            rates: PhysicalRates::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d_a", self.d_a), ("d_b", self.d_b), ("n_th", self.n_th)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parameter { name, value: v });
            }
        }
        for tau in [self.tau_a, self.tau_b] {
            if !(tau > 0.0 && tau <= 1.0) {
                return Err(Error::Transmissivity(tau));
            }
        }
        self.rates.validate()
    }

    pub fn params(&self, c_a: f64, c_b: f64, pump_a: Pump, pump_b: Pump) -> DptParams {
        DptParams { c_a, c_b, tau_a: self.tau_a, tau_b: self.tau_b, n_th: self.n_th, pump_a, pump_b }
    }

    /// Copy with the optical transmissivity multiplied by `factor`.
    pub fn with_optical_factor(&self, factor: f64) -> Self {
        Self { tau_a: self.tau_a * factor, ..*self }
    }

    pub fn with_n_th(&self, n_th: f64) -> Self {
        Self { n_th, ..*self }
    }
}

/// Full two-mode input–output channel of the transducer, with the optical
/// cavity on mode 1 and the microwave cavity on mode 2.
pub fn dpt_two_mode_channel(p: &DptParams) -> Result<TwoModeChannel> {
    p.validate()?;
    let (sa, sb) = (p.pump_a.sign(), p.pump_b.sign());
    let (ca, cb, ta, tb, n) = (p.c_a, p.c_b, p.tau_a, p.tau_b, p.n_th);
    let den = 1.0 - sa * ca - sb * cb;
    if den.abs() < SINGULAR_TOL {
        return Err(Error::Singular(den));
    }
    let g = (ta * tb * ca * cb).sqrt();
    let k = 2.0 / den;
    #[rustfmt::skip]
    let t = Matrix4::new(
        k * ta * (1.0 - sb * cb), 0.0,                      k * g * sa,               0.0,
        0.0,                      k * ta * (1.0 - sb * cb), 0.0,                      k * g * sb,
        k * g * sb,               0.0,                      k * tb * (1.0 - sa * ca), 0.0,
        0.0,                      k * g * sa,               0.0,                      k * tb * (1.0 - sa * ca),
    ) - Matrix4::identity();
    let alpha = ta * ((1.0 - ta) * (1.0 - sb * cb).powi(2) + ca * (1.0 + 2.0 * n + cb * (1.0 - tb)));
    let beta = tb * ((1.0 - tb) * (1.0 - sa * ca).powi(2) + cb * (1.0 + 2.0 * n + ca * (1.0 - ta)));
    let gamma = g * (2.0 * n - sa * sb * (1.0 + sb * ta + sa * tb + ca * (1.0 - tb) + cb * (1.0 - ta)));
    let kn = 2.0 / (den * den);
    let gx = kn * gamma * sa * sb;
    let gp = kn * gamma;
    #[rustfmt::skip]
    let nm = Matrix4::new(
        kn * alpha, 0.0,        gx,        0.0,
        0.0,        kn * alpha, 0.0,       gp,
        gx,         0.0,        kn * beta, 0.0,
        0.0,        gp,         0.0,       kn * beta,
    );
    TwoModeChannel::new(t, nm)
}

/// Closed-form single-mode conversion channel of a red–red transducer.
pub fn conversion_channel(dir: Direction, p: &DptParams) -> Result<OneModeChannel> {
    p.validate()?;
    if !p.is_converter() {
        return Err(Error::OperatingPoint("conversion needs both pumps red"));
    }
    let (ca, cb, ta, tb, n) = (p.c_a, p.c_b, p.tau_a, p.tau_b, p.n_th);
    let d = 1.0 + ca + cb;
    let t = -2.0 * (ta * tb * ca * cb).sqrt() / d;
    let m = match dir {
        Direction::Down => 0.5 + 2.0 * tb * cb * (2.0 * n - ta * ca) / (d * d),
        Direction::Up => 0.5 + 2.0 * ta * ca * (2.0 * n - tb * cb) / (d * d),
    };
    Ok(OneModeChannel::scalar_channel(t, m))
}

/// Conversion channel obtained from the full two-mode channel by feeding
/// vacuum into the unused input and discarding the unused output.
pub fn traced_conversion_channel(dir: Direction, p: &DptParams) -> Result<OneModeChannel> {
    if !p.is_converter() {
        return Err(Error::OperatingPoint("conversion needs both pumps red"));
    }
    let full = dpt_two_mode_channel(p)?;
    let (out, inp) = match dir {
        Direction::Down => (2, 0),
        Direction::Up => (0, 2),
    };
    let t: Matrix2<f64> = full.t().fixed_view::<2, 2>(out, inp).into_owned();
    let t_idle: Matrix2<f64> = full.t().fixed_view::<2, 2>(out, out).into_owned();
    let n: Matrix2<f64> = full.n().fixed_view::<2, 2>(out, out).into_owned() + t_idle * t_idle.transpose() * 0.5;
    OneModeChannel::new(t, n)
}

/// Outcome of the two stability criteria for a single blue-detuned pump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stability {
    pub cooperativity: bool,
    pub rates: bool,
}

impl Stability {
    pub fn ok(self) -> bool {
        self.cooperativity && self.rates
    }
}

/// Evaluates `C₊ < C₋ + 1` and
/// `C₊κ₊/(κ₋+γ) < C₋κ₋/(κ₊+γ) + (κ₊+κ₋)/γ`, each with [`STABILITY_MARGIN`].
/// A transducer with no blue pump is stable.
pub fn stability_criteria(p: &DptParams, rates: &PhysicalRates) -> Result<Stability> {
    p.validate()?;
    rates.validate()?;
    let (c_plus, c_minus, k_plus, k_minus) = match (p.pump_a, p.pump_b) {
        (Pump::Red, Pump::Red) => return Ok(Stability { cooperativity: true, rates: true }),
        (Pump::Blue, Pump::Red) => (p.c_a, p.c_b, rates.kappa_a, rates.kappa_b),
        (Pump::Red, Pump::Blue) => (p.c_b, p.c_a, rates.kappa_b, rates.kappa_a),
        (Pump::Blue, Pump::Blue) => return Err(Error::BothPumpsBlue),
    };
    let g = rates.gamma_m;
    let first = c_minus + 1.0 - c_plus >= STABILITY_MARGIN;
    let lhs = c_plus * k_plus / (k_minus + g);
    let rhs = c_minus * k_minus / (k_plus + g) + (k_plus + k_minus) / g;
    Ok(Stability { cooperativity: first, rates: rhs - lhs >= STABILITY_MARGIN })
}

pub fn stability_ok(p: &DptParams, rates: &PhysicalRates) -> Result<bool> {
    Ok(stability_criteria(p, rates)?.ok())
}

/// Splits an external optical transmissivity `tau_e` over the optical
/// ports of two transducers. Each transducer's `tau_a` is multiplied by its
/// share; microwave parameters are untouched.
pub fn fold_external_loss(caps: &DeviceCaps, tau_e: f64, shares: [f64; 2]) -> Result<[DeviceCaps; 2]> {
    if !(0.0..=1.0).contains(&tau_e) {
        return Err(Error::Transmissivity(tau_e));
    }
    for s in shares {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Transmissivity(s));
        }
    }
    let product = shares[0] * shares[1];
    if (product - tau_e).abs() > 1e-12 {
        return Err(Error::LossSplit { product, expected: tau_e });
    }
    Ok([caps.with_optical_factor(shares[0]), caps.with_optical_factor(shares[1])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{apply_two_mode, physicality_check, CovMat2};
    use approx::assert_relative_eq;

    fn blue_a(c_a: f64, c_b: f64) -> DptParams {
        DptParams::converter(c_a, c_b, 1.0, 1.0, 0.0).with_pumps(Pump::Blue, Pump::Red)
    }

    #[test]
    fn stability_examples() {
        let rates = PhysicalRates::default();
        assert!(stability_criteria(&blue_a(1.5, 1.0), &rates).unwrap().cooperativity);
        assert!(!stability_criteria(&blue_a(2.5, 1.0), &rates).unwrap().cooperativity);
        assert!(stability_ok(&DptParams::converter(1e6, 1e6, 1.0, 1.0, 0.0), &rates).unwrap());
        assert!(matches!(
            stability_ok(&blue_a(1.0, 1.0).with_pumps(Pump::Blue, Pump::Blue), &rates),
            Err(Error::BothPumpsBlue)
        ));
    }

    #[test]
    fn rate_criterion_binds_for_skewed_cavities() {
        let rates = PhysicalRates { kappa_a: 100.0, kappa_b: 1.0, gamma_m: 100.0 };
        let s = stability_criteria(&blue_a(1.5, 1.0), &rates).unwrap();
        assert!(s.cooperativity && !s.rates);
    }

    #[test]
    fn zero_cooperativity_is_a_reflection() {
        let p = DptParams::converter(0.0, 0.0, 0.5, 1.0, 3.0);
        let ch = dpt_two_mode_channel(&p).unwrap();
        assert_relative_eq!(ch.t()[(0, 0)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(ch.t()[(2, 2)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(ch.n()[(0, 0)], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn red_red_channel_is_physical_on_vacuum() {
        let p = DptParams::converter(3.0, 7.0, 0.8, 0.6, 5.0);
        let out = apply_two_mode(&dpt_two_mode_channel(&p).unwrap(), &CovMat2::vacuum());
        assert!(physicality_check(&out));
    }

    #[test]
    fn conversion_equals_loss_plus_noise() {
        let p = DptParams::converter(40.0, 12.0, 0.7, 0.9, 2.5);
        let (t, m) = conversion_channel(Direction::Down, &p).unwrap().scalar().unwrap();
        let eta = t * t;
        assert_relative_eq!(m, (1.0 - eta) / 2.0 + eta * p.n_th / (p.tau_a * p.c_a), max_relative = 1e-13);
    }

    #[test]
    fn blue_pump_rejected_for_conversion() {
        assert!(conversion_channel(Direction::Up, &blue_a(0.5, 1.0)).is_err());
        assert!(traced_conversion_channel(Direction::Down, &blue_a(0.5, 1.0)).is_err());
    }

    #[test]
    fn fold_checks_product() {
        let caps = DeviceCaps::brubaker2022();
        let [c1, c2] = fold_external_loss(&caps, 0.25, [0.5, 0.5]).unwrap();
        assert_relative_eq!(c1.tau_a, caps.tau_a * 0.5);
        assert_eq!(c2.tau_b, caps.tau_b);
        assert!(matches!(fold_external_loss(&caps, 0.3, [0.5, 0.5]), Err(Error::LossSplit { .. })));
    }
}
