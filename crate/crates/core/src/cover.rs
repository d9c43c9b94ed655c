//! Semilog model of the universal cover of the punctured plane.
//!
//! A point is a pair `(rho, phi)` with `rho > 0` and an unreduced angle
//! `phi`, so sheets stay distinguishable. The canonical lifts of
//! `z -> -1/z`, `z -> -z`, `z -> 1/z` and the monodromy shift are all affine
//! in the logarithmic coordinate `w = ln(rho) + i*phi`:
//! `w -> s*w + i*pi*n` with `s = +-1`. [`LiftMap`] stores that pair exactly.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for [`CoverPoint::approx_eq`].
pub const POINT_TOL: f64 = 1e-12;

/// A point of the universal cover in the semilog model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverPoint {
    pub rho: f64,
    pub phi: f64,
}

impl CoverPoint {
    /// The lifted unit `(1, 0)`.
    pub const ONE: CoverPoint = CoverPoint { rho: 1.0, phi: 0.0 };
    /// `(1, pi/2)`, projecting to `i`.
    pub const I: CoverPoint = CoverPoint { rho: 1.0, phi: PI / 2.0 };
    /// `(1, -pi/2)`, projecting to `-i`.
    pub const MINUS_I: CoverPoint = CoverPoint { rho: 1.0, phi: -PI / 2.0 };
    /// `(1, pi)`, the lift of `-1` reached counterclockwise.
    pub const MINUS_ONE_C: CoverPoint = CoverPoint { rho: 1.0, phi: PI };
    /// `(1, -pi)`, the lift of `-1` reached clockwise.
    pub const MINUS_ONE_P: CoverPoint = CoverPoint { rho: 1.0, phi: -PI };

    /// Builds a point; panics in debug builds if `rho` is not positive.
    pub fn new(rho: f64, phi: f64) -> Self {
        debug_assert!(rho > 0.0 && rho.is_finite(), "rho must be positive");
        CoverPoint { rho, phi }
    }

    /// Checked constructor.
    pub fn try_new(rho: f64, phi: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidParams(format!("bad cover point ({rho}, {phi})")));
        }
        Ok(CoverPoint { rho, phi })
    }

    /// Point with logarithmic coordinate `w`.
    pub fn from_log(w: Complex64) -> Self {
        CoverPoint { rho: w.re.exp(), phi: w.im }
    }

    /// Logarithmic coordinate `ln(rho) + i*phi`.
    pub fn log(&self) -> Complex64 {
        Complex64::new(self.rho.ln(), self.phi)
    }

    /// Canonical projection `rho * e^{i phi}`.
    pub fn project(&self) -> Complex64 {
        Complex64::from_polar(self.rho, self.phi)
    }

    /// Lift of `z -> 1/z` (the map C).
    pub fn inv(&self) -> Self {
        CoverPoint { rho: 1.0 / self.rho, phi: -self.phi }
    }

    /// Monodromy shift by `k` full turns.
    pub fn shifted(&self, k: i64) -> Self {
        CoverPoint { rho: self.rho, phi: self.phi + 2.0 * PI * k as f64 }
    }

    /// Cover-aware power `exp(gamma * (ln rho + i phi))`.
    pub fn pow(&self, gamma: Complex64) -> Complex64 {
        (gamma * self.log()).exp()
    }

    /// Integer power of the projection.
    pub fn powi(&self, n: i32) -> Complex64 {
        Complex64::from_polar(self.rho.powi(n), self.phi * n as f64)
    }

    /// Field-wise comparison with absolute tolerance.
    pub fn approx_eq(&self, other: &CoverPoint, tol: f64) -> bool {
        (self.rho - other.rho).abs() <= tol && (self.phi - other.phi).abs() <= tol
    }
}

impl fmt::Display for CoverPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.rho, self.phi)
    }
}

/// `rho * e^{i phi}`.
pub fn project(p: CoverPoint) -> Complex64 {
    p.project()
}

/// `exp(gamma * (ln rho + i phi))`.
pub fn cover_pow(p: CoverPoint, gamma: Complex64) -> Complex64 {
    p.pow(gamma)
}

/// Base part of a canonical lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LiftKind {
    Id,
    A,
    B,
    C,
}

/// A canonical lift written `M^shift ∘ kind` in operator (pullback) order.
///
/// As a point map it sends `p` to `kind(M^shift(p))`. This is the reading
/// under which the composition table reproduces e.g. `B∘B = M` and
/// `A∘B = M^{-1}∘C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LiftMap {
    pub kind: LiftKind,
    pub shift: i64,
}

impl LiftMap {
    pub const ID: LiftMap = LiftMap { kind: LiftKind::Id, shift: 0 };
    pub const A: LiftMap = LiftMap { kind: LiftKind::A, shift: 0 };
    pub const B: LiftMap = LiftMap { kind: LiftKind::B, shift: 0 };
    pub const C: LiftMap = LiftMap { kind: LiftKind::C, shift: 0 };

    /// The monodromy shift `M^k`.
    pub fn m_shift(k: i64) -> Self {
        LiftMap { kind: LiftKind::Id, shift: k }
    }

    /// Exact affine form `(s, n)` of the point map `w -> s*w + i*pi*n`.
    pub fn affine(&self) -> (i64, i64) {
        let (s, n0) = match self.kind {
            LiftKind::Id => (1, 0),
            LiftKind::A => (-1, 1),
            LiftKind::B => (1, 1),
            LiftKind::C => (-1, 0),
        };
        (s, n0 + 2 * self.shift * s)
    }

    /// Inverse of [`LiftMap::affine`].
    pub fn from_affine(s: i64, n: i64) -> Self {
        debug_assert!(s == 1 || s == -1);
        let odd = n.rem_euclid(2) == 1;
        match (s, odd) {
            (1, false) => LiftMap { kind: LiftKind::Id, shift: n / 2 },
            (1, true) => LiftMap { kind: LiftKind::B, shift: (n - 1).div_euclid(2) },
            (_, false) => LiftMap { kind: LiftKind::C, shift: -(n / 2) },
            (_, true) => LiftMap { kind: LiftKind::A, shift: (1 - n).div_euclid(2) },
        }
    }

    /// Applies the point map.
    pub fn apply(&self, p: CoverPoint) -> CoverPoint {
        let (s, n) = self.affine();
        let turn = PI * n as f64;
        if s == 1 {
            CoverPoint { rho: p.rho, phi: p.phi + turn }
        } else {
            CoverPoint { rho: 1.0 / p.rho, phi: turn - p.phi }
        }
    }

    /// The lift whose point action is `self` followed by `next`.
    pub fn then(&self, next: &LiftMap) -> LiftMap {
        let (s1, n1) = self.affine();
        let (s2, n2) = next.affine();
        LiftMap::from_affine(s1 * s2, s2 * n1 + n2)
    }

    /// Inverse point map.
    pub fn inverse(&self) -> LiftMap {
        let (s, n) = self.affine();
        LiftMap::from_affine(s, -s * n)
    }

    /// Whether the map reverses orientation (projects to an inversion).
    pub fn reverses(&self) -> bool {
        self.affine().0 == -1
    }
}

impl fmt::Display for LiftMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.kind {
            LiftKind::Id => "Id",
            LiftKind::A => "A",
            LiftKind::B => "B",
            LiftKind::C => "C",
        };
        match (self.shift, self.kind) {
            (0, _) => write!(f, "{base}"),
            (k, LiftKind::Id) => write!(f, "M^{k}"),
            (k, _) => write!(f, "M^{k}∘{base}"),
        }
    }
}

/// Applies a lift to a point.
pub fn apply_lift(m: LiftMap, p: CoverPoint) -> CoverPoint {
    m.apply(p)
}

/// Table entry for the pair `(m1, m2)`: the lift acting as `m1` then `m2`.
pub fn compose_lifts(m1: LiftMap, m2: LiftMap) -> LiftMap {
    m1.then(&m2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn projections() {
        assert!(close(CoverPoint::new(1.0, 0.0).project(), Complex64::new(1.0, 0.0)));
        assert!(close(CoverPoint::new(1.0, PI).project(), Complex64::new(-1.0, 0.0)));
        assert!(close(CoverPoint::new(2.0, -PI / 2.0).project(), Complex64::new(0.0, -2.0)));
    }

    #[test]
    fn lifts_of_unit() {
        let one = CoverPoint::ONE;
        assert!(apply_lift(LiftMap::A, one).approx_eq(&CoverPoint::new(1.0, PI), POINT_TOL));
        assert!(apply_lift(LiftMap::C, one).approx_eq(&one, POINT_TOL));
        let bb = apply_lift(LiftMap::B, apply_lift(LiftMap::B, one));
        assert!(bb.approx_eq(&CoverPoint::new(1.0, 2.0 * PI), POINT_TOL));
        assert!(bb.approx_eq(&apply_lift(LiftMap::m_shift(1), one), POINT_TOL));
    }

    #[test]
    fn composition_table() {
        use LiftKind::*;
        let l = |kind, shift| LiftMap { kind, shift };
        let table = [
            (LiftMap::A, LiftMap::A, l(Id, 0)),
            (LiftMap::A, LiftMap::B, l(C, -1)),
            (LiftMap::A, LiftMap::C, l(B, -1)),
            (LiftMap::B, LiftMap::A, l(C, 0)),
            (LiftMap::B, LiftMap::B, l(Id, 1)),
            (LiftMap::B, LiftMap::C, l(A, 1)),
            (LiftMap::C, LiftMap::A, l(B, 0)),
            (LiftMap::C, LiftMap::B, l(A, 0)),
            (LiftMap::C, LiftMap::C, l(Id, 0)),
        ];
        for (x, y, want) in table {
            assert_eq!(compose_lifts(x, y), want, "{x} with {y}");
        }
    }

    #[test]
    fn affine_round_trip() {
        for n in -7..=7 {
            for s in [-1, 1] {
                assert_eq!(LiftMap::from_affine(s, n).affine(), (s, n));
            }
        }
    }

    #[test]
    fn inverse_lifts() {
        for m in [LiftMap::A, LiftMap::B, LiftMap::C, LiftMap { kind: LiftKind::A, shift: 3 }] {
            assert_eq!(m.then(&m.inverse()), LiftMap::ID);
        }
    }

    #[test]
    fn powers() {
        let half = Complex64::new(0.5, 0.0);
        assert!(close(cover_pow(CoverPoint::new(1.0, 2.0 * PI), half), Complex64::new(-1.0, 0.0)));
        assert!(close(cover_pow(CoverPoint::new(4.0, 0.0), half), Complex64::new(2.0, 0.0)));
        assert!(close(cover_pow(CoverPoint::ONE, Complex64::new(0.3, -1.7)), Complex64::new(1.0, 0.0)));
        let p = CoverPoint::new(1.7, -2.2);
        assert!((p.powi(-3) - p.project().powi(-3)).norm() < 1e-13);
    }

    #[test]
    fn display() {
        assert_eq!(LiftMap { kind: LiftKind::A, shift: 1 }.to_string(), "M^1∘A");
        assert_eq!(LiftMap::m_shift(-2).to_string(), "M^-2");
    }
}
