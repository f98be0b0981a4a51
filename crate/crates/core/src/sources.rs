//! Microwave–optical entangled states produced by a single transducer.
//!
//! Every state has the optical mode on mode 1 and the microwave mode on
//! mode 2.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{apply_one_mode, apply_two_mode, BalancedForm, CovMat2, OneModeChannel, SqueezeParam};
use crate::transducer::{dpt_two_mode_channel, stability_ok, traced_conversion_channel, Direction, DptParams, PhysicalRates, Pump};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MoKind {
    /// Optical TMS, one arm downconverted.
    #[serde(rename = "EO")]
    Eo,
    /// Microwave TMS, one arm upconverted.
    #[serde(rename = "EM")]
    Em,
    /// Blue-detuned optical pump.
    #[serde(rename = "IO")]
    Io,
    /// Blue-detuned microwave pump.
    #[serde(rename = "IM")]
    Im,
}

impl MoKind {
    pub const ALL: [MoKind; 4] = [MoKind::Eo, MoKind::Em, MoKind::Io, MoKind::Im];

    pub fn label(self) -> &'static str {
        match self {
            MoKind::Eo => "EO",
            MoKind::Em => "EM",
            MoKind::Io => "IO",
            MoKind::Im => "IM",
        }
    }

    /// Pump detunings `(optical, microwave)` the source needs.
    pub fn pumps(self) -> (Pump, Pump) {
        match self {
            MoKind::Eo | MoKind::Em => (Pump::Red, Pump::Red),
            MoKind::Io => (Pump::Blue, Pump::Red),
            MoKind::Im => (Pump::Red, Pump::Blue),
        }
    }

    pub fn is_intrinsic(self) -> bool {
        matches!(self, MoKind::Io | MoKind::Im)
    }

    /// Whether `r` enters the state.
    pub fn uses_squeezing(self) -> bool {
        !self.is_intrinsic()
    }
}

impl fmt::Display for MoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for MoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MoKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Topology(format!("unknown source kind {s:?}")))
    }
}

fn check_operating_point(kind: MoKind, p: &DptParams, rates: &PhysicalRates) -> Result<()> {
    p.validate()?;
    if (p.pump_a, p.pump_b) != kind.pumps() {
        return Err(Error::OperatingPoint("pump detunings do not match the source kind"));
    }
    if kind.is_intrinsic() && !stability_ok(p, rates)? {
        return Err(Error::Unstable(kind.label()));
    }
    Ok(())
}

/// Closed-form state of a microwave–optical source. `r` is ignored by the
/// intrinsic sources.
pub fn mo_state(kind: MoKind, p: &DptParams, r: SqueezeParam, rates: &PhysicalRates) -> Result<BalancedForm> {
    check_operating_point(kind, p, rates)?;
    let (ca, cb, ta, tb, n) = (p.c_a, p.c_b, p.tau_a, p.tau_b, p.n_th);
    let g = (ta * tb * ca * cb).sqrt();
    let ch = (2.0 * r.r()).cosh();
    let sh = (2.0 * r.r()).sinh();
    let s = match kind {
        MoKind::Eo => {
            let d = 1.0 + ca + cb;
            let d2 = d * d;
            BalancedForm::with_det(
                ch / 2.0,
                0.5 + 2.0 * tb * cb * (2.0 * n + ta * ca * (ch - 1.0)) / d2,
                -g * sh / d,
                ch / 4.0 + tb * cb * (2.0 * n * ch - ta * ca * (ch - 1.0)) / d2,
            )
        }
        MoKind::Em => {
            let d = 1.0 + ca + cb;
            let d2 = d * d;
            BalancedForm::with_det(
                0.5 + 2.0 * ta * ca * (2.0 * n + tb * cb * (ch - 1.0)) / d2,
                ch / 2.0,
                -g * sh / d,
                ch / 4.0 + ta * ca * (2.0 * n * ch - tb * cb * (ch - 1.0)) / d2,
            )
        }
        MoKind::Io => {
            let d = 1.0 - ca + cb;
            let d2 = d * d;
            BalancedForm::with_det(
                0.5 + 4.0 * ta * ca * (cb + n + 1.0) / d2,
                0.5 + 4.0 * tb * cb * (ca + n) / d2,
                2.0 * (ca + cb + 2.0 * n + 1.0) * g / d2,
                0.25 + (2.0 * ta * ca * ((1.0 - tb) * cb + n + 1.0) + 2.0 * tb * cb * ((1.0 - ta) * ca + n)) / d2,
            )
        }
        MoKind::Im => {
            let d = 1.0 + ca - cb;
            let d2 = d * d;
            BalancedForm::with_det(
                0.5 + 4.0 * ta * ca * (cb + n) / d2,
                0.5 + 4.0 * tb * cb * (ca + n + 1.0) / d2,
                2.0 * (ca + cb + 2.0 * n + 1.0) * g / d2,
                0.25 + (2.0 * ta * ca * ((1.0 - tb) * cb + n) + 2.0 * tb * cb * ((1.0 - ta) * ca + n + 1.0)) / d2,
            )
        }
    };
    Ok(s)
}

/// Same state built by pushing covariance matrices through the transducer
/// channels. Intrinsic sources get a π phase on the microwave mode so the
/// correlation sign matches [`mo_state`]; the entanglement is unaffected.
pub fn mo_state_via_composition(
    kind: MoKind,
    p: &DptParams,
    r: SqueezeParam,
    rates: &PhysicalRates,
) -> Result<BalancedForm> {
    check_operating_point(kind, p, rates)?;
    let v = match kind {
        MoKind::Eo => {
            let ch = traced_conversion_channel(Direction::Down, p)?;
            apply_one_mode(&ch, &BalancedForm::tms(r).to_cov(), 2)?
        }
        MoKind::Em => {
            let ch = traced_conversion_channel(Direction::Up, p)?;
            apply_one_mode(&ch, &BalancedForm::tms(r).to_cov(), 1)?
        }
        MoKind::Io | MoKind::Im => {
            let raw = apply_two_mode(&dpt_two_mode_channel(p)?, &CovMat2::vacuum());
            apply_one_mode(&OneModeChannel::scalar_channel(-1.0, 0.0), &raw, 2)?
        }
    };
    v.to_balanced()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::physicality_check;
    use approx::assert_relative_eq;

    fn params(kind: MoKind, ca: f64, cb: f64) -> DptParams {
        let (pa, pb) = kind.pumps();
        DptParams::converter(ca, cb, 0.8, 0.7, 3.0).with_pumps(pa, pb)
    }

    #[test]
    fn closed_forms_match_composition() {
        let r = SqueezeParam::new(0.7).unwrap();
        let rates = PhysicalRates::default();
        for (kind, ca, cb) in [(MoKind::Eo, 5.0, 9.0), (MoKind::Em, 2.0, 30.0), (MoKind::Io, 4.0, 3.5), (MoKind::Im, 6.0, 6.5)] {
            let p = params(kind, ca, cb);
            let closed = mo_state(kind, &p, r, &rates).unwrap();
            let comp = mo_state_via_composition(kind, &p, r, &rates).unwrap();
            assert!(closed.approx_eq(&comp, 1e-12), "{kind}: {closed:?} vs {comp:?}");
            assert_relative_eq!(closed.det(), comp.a() * comp.b() - comp.c() * comp.c(), max_relative = 1e-11);
            assert!(physicality_check(&closed.to_cov()));
        }
    }

    #[test]
    fn raw_intrinsic_composition_has_flipped_correlation() {
        let p = params(MoKind::Io, 4.0, 3.5);
        let raw = apply_two_mode(&dpt_two_mode_channel(&p).unwrap(), &CovMat2::vacuum()).to_balanced().unwrap();
        let closed = mo_state(MoKind::Io, &p, SqueezeParam::new(0.0).unwrap(), &PhysicalRates::default()).unwrap();
        assert!(raw.approx_eq(&BalancedForm::new(closed.a(), closed.b(), -closed.c()), 1e-12));
        assert_relative_eq!(raw.min_sympl_eig_pt(), closed.min_sympl_eig_pt(), max_relative = 1e-12);
    }

    #[test]
    fn unstable_intrinsic_rejected() {
        let p = params(MoKind::Io, 5.0, 3.0);
        let err = mo_state(MoKind::Io, &p, SqueezeParam::new(0.0).unwrap(), &PhysicalRates::default());
        assert!(matches!(err, Err(Error::Unstable("IO"))));
    }

    #[test]
    fn wrong_pumps_rejected() {
        let p = params(MoKind::Eo, 5.0, 3.0);
        assert!(mo_state(MoKind::Im, &p, SqueezeParam::new(0.0).unwrap(), &PhysicalRates::default()).is_err());
    }

    #[test]
    fn near_instability_keeps_precision() {
        // d = 1e-7 puts the entries near 1e16 while ν stays of order one.
        let p = params(MoKind::Io, 1000.0, 999.0 + 1e-7);
        let s = mo_state(MoKind::Io, &p, SqueezeParam::new(0.0).unwrap(), &PhysicalRates::default()).unwrap();
        assert!(s.a() > 1e15);
        let nu = s.min_sympl_eig_pt();
        assert!(nu > 0.0 && nu < 10.0 && nu.is_finite());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("im".parse::<MoKind>().unwrap(), MoKind::Im);
        assert!("XX".parse::<MoKind>().is_err());
    }
}
