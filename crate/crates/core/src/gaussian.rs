//! Two-mode Gaussian states in the covariance-matrix picture.
//!
//! Units are ħ = 1, so the vacuum has quadrature variance ½. Quadratures are
//! ordered (x₁, p₁, x₂, p₂).

use nalgebra::{Complex, Matrix2, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest eigenvalue of `V + iΩ/2` still accepted as physical.
pub const PHYSICALITY_TOL: f64 = 1e-10;
/// Rounding guard: a state counts as entangled only when `ν̃₋ < ½ - NU_TOL`.
pub const NU_TOL: f64 = 1e-15;
const SYMMETRY_TOL: f64 = 1e-12;
const BALANCE_TOL: f64 = 1e-9;

/// Symplectic form Ω = ⊕ [[0, 1], [-1, 0]].
pub fn omega() -> Matrix4<f64> {
    let mut w = Matrix4::zeros();
    w[(0, 1)] = 1.0;
    w[(1, 0)] = -1.0;
    w[(2, 3)] = 1.0;
    w[(3, 2)] = -1.0;
    w
}

fn scale_of(m: &Matrix4<f64>) -> f64 {
    m.amax().max(1.0)
}

fn symmetrize(m: Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

/// Squeezing parameter `r ≥ 0` of a two-mode squeezed vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParam(f64);

impl SqueezeParam {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::NegativeSqueezing(r));
        }
        Ok(Self(r))
    }

    /// From squeezing in dB, `10·log10(e^{2r})`.
    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(db * std::f64::consts::LN_10 / 20.0)
    }

    pub fn r(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        20.0 * self.0 / std::f64::consts::LN_10
    }
}

/// Real symmetric 4×4 covariance matrix of a two-mode state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMat2(Matrix4<f64>);

impl CovMat2 {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let asym = (m - m.transpose()).amax();
        if !m.iter().all(|x| x.is_finite()) || asym > SYMMETRY_TOL * scale_of(&m) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self(symmetrize(m)))
    }

    pub fn vacuum() -> Self {
        Self(Matrix4::identity() * 0.5)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// Reads off `(a, b, c)` if the matrix has the balanced structure
    /// `[[aI, cZ], [cZ, bI]]`.
    pub fn to_balanced(&self) -> Result<BalancedForm> {
        let m = &self.0;
        let a = m[(0, 0)];
        let b = m[(2, 2)];
        let c = m[(0, 2)];
        let dev = [
            m[(1, 1)] - a,
            m[(3, 3)] - b,
            m[(1, 3)] + c,
            m[(0, 1)],
            m[(2, 3)],
            m[(0, 3)],
            m[(1, 2)],
        ]
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
        if dev > BALANCE_TOL * scale_of(m) {
            return Err(Error::NotBalanced(dev));
        }
        Ok(BalancedForm::new(a, b, c))
    }
}

/// Balanced two-mode state `[[aI, cZ], [cZ, bI]]` with `Z = diag(1, -1)`.
///
/// The determinant `ab - c²` of the reduced 2×2 block is carried along
/// explicitly. States produced near a cavity instability have `a`, `b`, `c`
/// many orders of magnitude above their symplectic eigenvalues, and
/// recomputing `ab - c²` from rounded entries would lose every digit.
#[derive(Debug, Clone, Copy)]
pub struct BalancedForm {
    a: f64,
    b: f64,
    c: f64,
    det: f64,
}

impl PartialEq for BalancedForm {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.c == other.c
    }
}

impl BalancedForm {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self::with_det(a, b, c, a * b - c * c)
    }

    /// `det` must equal `ab - c²`; callers use it to supply a value computed
    /// without cancellation.
    pub(crate) fn with_det(a: f64, b: f64, c: f64, det: f64) -> Self {
        Self { a, b, c, det }
    }

    pub fn vacuum() -> Self {
        Self::with_det(0.5, 0.5, 0.0, 0.25)
    }

    /// Two-mode squeezed vacuum.
    pub fn tms(r: SqueezeParam) -> Self {
        let r = r.r();
        Self::with_det((2.0 * r).cosh() / 2.0, (2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0, 0.25)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.det.is_finite()
    }

    pub fn to_cov(&self) -> CovMat2 {
        let (a, b, c) = (self.a, self.b, self.c);
        #[rustfmt::skip]
        let m = Matrix4::new(
            a,   0.0, c,   0.0,
            0.0, a,   0.0, -c,
            c,   0.0, b,   0.0,
            0.0, -c,  0.0, b,
        );
        CovMat2(m)
    }

    /// Exchanges the two modes.
    pub fn swap_modes(&self) -> Self {
        Self::with_det(self.b, self.a, self.c, self.det)
    }

    /// Smallest symplectic eigenvalue of the partial transpose,
    /// `(a + b - sqrt((a - b)² + 4c²)) / 2`, evaluated as
    /// `2(ab - c²) / (a + b + sqrt((a - b)² + 4c²))`.
    pub fn min_sympl_eig_pt(&self) -> f64 {
        if self.c == 0.0 {
            return self.a.min(self.b);
        }
        let root = ((self.a - self.b).powi(2) + 4.0 * self.c * self.c).sqrt();
        2.0 * self.det / (self.a + self.b + root)
    }

    pub fn log_negativity(&self) -> f64 {
        nu_to_log_negativity(self.min_sympl_eig_pt())
    }

    pub fn is_entangled(&self) -> bool {
        nu_is_entangled(self.min_sympl_eig_pt())
    }

    /// Applies a channel of the form `T = tI`, `N = mI` to one mode without
    /// leaving the balanced representation.
    pub fn through(&self, ch: &OneModeChannel, mode: usize) -> Result<Self> {
        let (t, m) = ch.scalar().ok_or(Error::NonScalarChannel)?;
        let (a, b, c, d) = (self.a, self.b, self.c, self.det);
        match mode {
            1 => Ok(Self::with_det(t * t * a + m, b, t * c, t * t * d + m * b)),
            2 => Ok(Self::with_det(a, t * t * b + m, t * c, t * t * d + m * a)),
            other => Err(Error::InvalidMode(other)),
        }
    }

    /// Componentwise comparison relative to `max(1, |x|)`.
    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        [(self.a, other.a), (self.b, other.b), (self.c, other.c)]
            .iter()
            .all(|&(x, y)| (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0))
    }
}

pub fn nu_is_entangled(nu: f64) -> bool {
    nu < 0.5 - NU_TOL
}

/// `max(0, -log2(2ν))`, zero inside the rounding guard.
pub fn nu_to_log_negativity(nu: f64) -> f64 {
    if nu_is_entangled(nu) {
        -(2.0 * nu).log2()
    } else {
        0.0
    }
}

pub fn min_sympl_eig_pt(s: &BalancedForm) -> f64 {
    s.min_sympl_eig_pt()
}

/// `E_N = max(0, -log2(2ν̃₋))`.
pub fn log_negativity(s: &BalancedForm) -> f64 {
    s.log_negativity()
}

/// Gaussian channel `V ↦ T V Tᵀ + N` on both modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeChannel {
    t: Matrix4<f64>,
    n: Matrix4<f64>,
}

impl TwoModeChannel {
    pub fn new(t: Matrix4<f64>, n: Matrix4<f64>) -> Result<Self> {
        let asym = (n - n.transpose()).amax();
        if asym > SYMMETRY_TOL * scale_of(&n) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { t, n: symmetrize(n) })
    }

    pub fn identity() -> Self {
        Self { t: Matrix4::identity(), n: Matrix4::zeros() }
    }

    pub fn t(&self) -> &Matrix4<f64> {
        &self.t
    }

    pub fn n(&self) -> &Matrix4<f64> {
        &self.n
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Self) -> Self {
        Self {
            t: next.t * self.t,
            n: symmetrize(next.t * self.n * next.t.transpose() + next.n),
        }
    }
}

/// Gaussian channel on a single mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneModeChannel {
    t: Matrix2<f64>,
    n: Matrix2<f64>,
}

impl OneModeChannel {
    pub fn new(t: Matrix2<f64>, n: Matrix2<f64>) -> Result<Self> {
        let asym = (n[(0, 1)] - n[(1, 0)]).abs();
        if asym > SYMMETRY_TOL * n.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let n = (n + n.transpose()) * 0.5;
        Ok(Self { t, n })
    }

    /// `T = tI`, `N = mI`.
    pub fn scalar_channel(t: f64, m: f64) -> Self {
        Self { t: Matrix2::identity() * t, n: Matrix2::identity() * m }
    }

    pub fn identity() -> Self {
        Self::scalar_channel(1.0, 0.0)
    }

    pub fn t(&self) -> &Matrix2<f64> {
        &self.t
    }

    pub fn n(&self) -> &Matrix2<f64> {
        &self.n
    }

    /// `(t, m)` if the channel is `T = tI`, `N = mI`.
    pub fn scalar(&self) -> Option<(f64, f64)> {
        let (t, n) = (&self.t, &self.n);
        let ok = t[(0, 1)] == 0.0
            && t[(1, 0)] == 0.0
            && t[(0, 0)] == t[(1, 1)]
            && n[(0, 1)] == 0.0
            && n[(0, 0)] == n[(1, 1)];
        ok.then(|| (t[(0, 0)], n[(0, 0)]))
    }

    pub fn then(&self, next: &Self) -> Self {
        let n = next.t * self.n * next.t.transpose() + next.n;
        Self { t: next.t * self.t, n: (n + n.transpose()) * 0.5 }
    }

    /// Acts on `mode` and as the identity on the other mode.
    pub fn embed(&self, mode: usize) -> Result<TwoModeChannel> {
        let off = match mode {
            1 => 0,
            2 => 2,
            other => return Err(Error::InvalidMode(other)),
        };
        let mut t = Matrix4::identity();
        let mut n = Matrix4::zeros();
        t.fixed_view_mut::<2, 2>(off, off).copy_from(&self.t);
        n.fixed_view_mut::<2, 2>(off, off).copy_from(&self.n);
        Ok(TwoModeChannel { t, n })
    }
}

pub fn make_tms(r: SqueezeParam) -> CovMat2 {
    BalancedForm::tms(r).to_cov()
}

pub fn apply_two_mode(ch: &TwoModeChannel, v: &CovMat2) -> CovMat2 {
    CovMat2(symmetrize(ch.t * v.0 * ch.t.transpose() + ch.n))
}

pub fn apply_one_mode(ch: &OneModeChannel, v: &CovMat2, mode: usize) -> Result<CovMat2> {
    Ok(apply_two_mode(&ch.embed(mode)?, v))
}

/// Pure loss with transmissivity `tau`.
pub fn loss_channel(tau: f64) -> Result<OneModeChannel> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Transmissivity(tau));
    }
    Ok(OneModeChannel::scalar_channel(tau.sqrt(), (1.0 - tau) / 2.0))
}

/// Smallest eigenvalue of the Hermitian matrix `V + iΩ/2`.
pub fn uncertainty_min_eig(v: &CovMat2) -> f64 {
    let w = omega();
    let h = nalgebra::Matrix4::<Complex<f64>>::from_fn(|i, j| Complex::new(v.0[(i, j)], 0.5 * w[(i, j)]));
    SymmetricEigen::new(h).eigenvalues.min()
}

/// `V + iΩ/2 ⪰ 0` up to [`PHYSICALITY_TOL`].
pub fn physicality_check(v: &CovMat2) -> bool {
    uncertainty_min_eig(v) >= -PHYSICALITY_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_is_physical_and_separable() {
        assert!(physicality_check(&CovMat2::vacuum()));
        let v = BalancedForm::vacuum();
        assert_relative_eq!(v.min_sympl_eig_pt(), 0.5);
        assert_eq!(v.log_negativity(), 0.0);
    }

    #[test]
    fn tms_log_negativity_is_linear_in_r() {
        for r in [0.1, 0.5, 1.0, 1.7] {
            let s = BalancedForm::tms(SqueezeParam::new(r).unwrap());
            assert_relative_eq!(s.min_sympl_eig_pt(), (-2.0 * r).exp() / 2.0, max_relative = 1e-12);
            assert_relative_eq!(s.log_negativity(), 2.0 * r / std::f64::consts::LN_2, max_relative = 1e-12);
            assert!(physicality_check(&make_tms(SqueezeParam::new(r).unwrap())));
        }
    }

    #[test]
    fn squeezing_db_round_trip() {
        let s = SqueezeParam::from_db(5.0).unwrap();
        assert_relative_eq!(s.r(), 0.5756, epsilon = 1e-4);
        assert_relative_eq!(s.db(), 5.0, max_relative = 1e-14);
        assert!(SqueezeParam::new(-0.1).is_err());
    }

    #[test]
    fn balanced_round_trip() {
        let s = BalancedForm::new(1.3, 2.1, -0.7);
        assert_eq!(s.to_cov().to_balanced().unwrap(), s);
    }

    #[test]
    fn non_balanced_matrix_rejected() {
        let mut m = *BalancedForm::new(1.0, 1.0, 0.2).to_cov().matrix();
        m[(0, 1)] = 0.3;
        m[(1, 0)] = 0.3;
        assert!(matches!(CovMat2::new(m).unwrap().to_balanced(), Err(Error::NotBalanced(_))));
        m[(0, 1)] = 0.4;
        assert!(matches!(CovMat2::new(m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn full_loss_disentangles() {
        let s = make_tms(SqueezeParam::new(1.0).unwrap());
        let out = apply_one_mode(&loss_channel(0.0).unwrap(), &s, 1).unwrap();
        let b = out.to_balanced().unwrap();
        assert_relative_eq!(b.a(), 0.5);
        assert_eq!(b.c(), 0.0);
        assert_eq!(b.log_negativity(), 0.0);
    }

    #[test]
    fn unit_transmissivity_is_identity() {
        let s = make_tms(SqueezeParam::new(0.8).unwrap());
        let out = apply_one_mode(&loss_channel(1.0).unwrap(), &s, 2).unwrap();
        assert_eq!(out, s);
        assert!(loss_channel(1.2).is_err());
        assert!(matches!(apply_one_mode(&loss_channel(0.5).unwrap(), &s, 3), Err(Error::InvalidMode(3))));
    }

    #[test]
    fn scalar_fast_path_matches_matrix_path() {
        let s = BalancedForm::new(3.2, 1.7, 2.0);
        let ch = OneModeChannel::scalar_channel(-0.6, 0.9);
        for mode in [1, 2] {
            let fast = s.through(&ch, mode).unwrap();
            let slow = apply_one_mode(&ch, &s.to_cov(), mode).unwrap().to_balanced().unwrap();
            assert!(fast.approx_eq(&slow, 1e-14));
            assert_relative_eq!(fast.det(), slow.a() * slow.b() - slow.c() * slow.c(), max_relative = 1e-13);
        }
    }

    #[test]
    fn unphysical_state_detected() {
        assert!(!physicality_check(&BalancedForm::new(0.4, 0.4, 0.0).to_cov()));
        assert!(!physicality_check(&BalancedForm::new(1.0, 1.0, 0.9).to_cov()));
    }

    #[test]
    fn channel_composition_matches_sequential_application() {
        let s = make_tms(SqueezeParam::new(0.6).unwrap());
        let l1 = loss_channel(0.7).unwrap();
        let l2 = OneModeChannel::scalar_channel(0.4, 1.1);
        let seq = apply_one_mode(&l2, &apply_one_mode(&l1, &s, 1).unwrap(), 1).unwrap();
        let comp = apply_one_mode(&l1.then(&l2), &s, 1).unwrap();
        assert!((seq.matrix() - comp.matrix()).amax() < 1e-14);
    }
}
