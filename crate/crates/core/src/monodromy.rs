//! Matrix representations of Θ_A, Θ_B and the monodromy in the `E±` basis,
//! algebraic continuation of `E±` over the whole cover, and the polylocal
//! relations between values at distinguished points.
//!
//! Row `i` of a representation matrix holds the coefficients of `Θ[E_i]`,
//! so `(Θ[E₊], Θ[E₋])ᵀ = X (E₊, E₋)ᵀ` and the column `𝐄(Mẑ) = 𝐌 𝐄(ẑ)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cover::CoverPoint;
use crate::error::{Error, Result};
use crate::polys::{DeltaPm, PolySet};
use crate::solver::{scaled_diff, EigenBasis, SolutionHandle};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// A 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix2 {
    pub a11: C,
    pub a12: C,
    pub a21: C,
    pub a22: C,
}

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2 { a11: ONE, a12: ZERO, a21: ZERO, a22: ONE };

    pub fn new(a11: C, a12: C, a21: C, a22: C) -> Self {
        Matrix2 { a11, a12, a21, a22 }
    }

    pub fn diag(d1: C, d2: C) -> Self {
        Matrix2::new(d1, ZERO, ZERO, d2)
    }

    /// `diag(1, −1)`, the representation of Θ_C under unit normalization.
    pub fn theta_c() -> Self {
        Matrix2::diag(ONE, -ONE)
    }

    pub fn scale(&self, s: C) -> Self {
        Matrix2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn det(&self) -> C {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> C {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Self {
        Matrix2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return Err(Error::DegenerateParams("singular matrix".into()));
        }
        Ok(Matrix2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d))
    }

    /// Integer power (negative powers use the inverse).
    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inverse()? } else { *self };
        let mut out = Matrix2::IDENTITY;
        for _ in 0..k.unsigned_abs() {
            out = out * base;
        }
        Ok(out)
    }

    pub fn apply(&self, v: [C; 2]) -> [C; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn entries(&self) -> [C; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise `|self − other|`.
    pub fn max_diff(&self, other: &Matrix2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Largest entrywise difference relative to `max(1, |entries|)`.
    pub fn rel_diff(&self, other: &Matrix2) -> f64 {
        self.max_diff(other) / self.max_abs().max(other.max_abs()).max(1.0)
    }

    /// Eigenvalues `(tr ± √(tr² − 4 det))/2`.
    pub fn eigenvalues(&self) -> (C, C) {
        let tr = self.trace();
        let disc = (tr * tr - 4.0 * self.det()).sqrt();
        ((tr + disc) / 2.0, (tr - disc) / 2.0)
    }

    /// `[[[re,im],[re,im]],[[re,im],[re,im]]]`.
    pub fn to_array(&self) -> [[[f64; 2]; 2]; 2] {
        let p = |z: C| [z.re, z.im];
        [[p(self.a11), p(self.a12)], [p(self.a21), p(self.a22)]]
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

/// `(E₊, E₋)` at the distinguished points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    /// At `1̂ = (1, 0)`.
    pub one: [C; 2],
    /// At `(1, π)`.
    pub minus_one_c: [C; 2],
    /// At `(1, −π)`.
    pub minus_one_p: [C; 2],
    /// At `î = (1, π/2)`.
    pub i: [C; 2],
    /// At `−î = (1, −π/2)`.
    pub minus_i: [C; 2],
    pub mu: C,
    pub two_omega: C,
    pub ell: u32,
    pub delta: C,
    pub delta_plus: C,
    pub delta_minus: C,
    /// `a± + b±` recovered from the values at `±î`.
    pub sums: [C; 2],
    /// `a± − b±` recovered from the values at `±î`.
    pub diffs: [C; 2],
    pub residuals: BoundaryResiduals,
}

/// Scaled residuals of the relations among boundary values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResiduals {
    /// `E₊E₋` product relation at the two lifts of `−1`.
    pub minus_one: f64,
    /// Same at `±î`.
    pub imaginary_unit: f64,
    /// `(Δ₊/E₊(1))(a₊−b₊) = (Δ₋/E₋(1))(a₋−b₋)`.
    pub cross_ratio: f64,
    /// `a± + b±` from `±î` data vs direct values.
    pub sums: f64,
    /// `a± − b±` from `±î` data vs direct values.
    pub diffs: f64,
}

impl BoundaryResiduals {
    pub fn max(&self) -> f64 {
        [self.minus_one, self.imaginary_unit, self.cross_ratio, self.sums, self.diffs].into_iter().fold(0.0, f64::max)
    }
}

impl BoundaryData {
    /// `a± = E±(1, π)`.
    pub fn a(&self) -> [C; 2] {
        self.minus_one_c
    }

    /// `b± = E±(1, −π)`.
    pub fn b(&self) -> [C; 2] {
        self.minus_one_p
    }

    fn parity(&self) -> f64 {
        if self.ell % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// `a± ± b±` from the values at `±î` (sums first, then differences).
fn sums_and_diffs(ps: &PolySet<C>, e1: [C; 2], ei: [C; 2], emi: [C; 2], tw: C, dpm: &DeltaPm) -> ([C; 2], [C; 2]) {
    let i = C::new(0.0, 1.0);
    let l = ps.ell as i32;
    let sg_l = if ps.ell % 2 == 0 { 1.0 } else { -1.0 };
    let mu = ps.mu;
    let p = |z: C| ps.p.eval_c64(z);
    let q = |z: C| ps.q.eval_c64(z);
    let il1 = -i.powi(l + 1);
    let mut sums = [ZERO; 2];
    let mut diffs = [ZERO; 2];
    for (idx, sg) in [(0usize, 1.0f64), (1, -1.0)] {
        let (d_same, d_other, e_other) =
            if idx == 0 { (dpm.minus, dpm.plus, e1[1]) } else { (dpm.plus, dpm.minus, e1[0]) };
        let s = (ei[idx] * ei[idx] * p(-i) - sg_l * p(i) * emi[idx] * emi[idx]) * il1
            - sg * sg_l * tw * (q(i) + q(-i) - mu * (p(i) + p(-i))) * ei[idx] * emi[idx];
        sums[idx] = s / (d_same * e1[idx]);
        let si = i * sg;
        let d = il1 * (p(-i) * ei[0] * ei[1] + sg_l * p(i) * emi[0] * emi[1])
            + sg_l * tw * ((q(-si) - mu * p(-si)) * ei[0] * emi[1] - (q(si) - mu * p(si)) * emi[0] * ei[1]);
        diffs[idx] = d / (d_other * e_other);
    }
    (sums, diffs)
}

/// Values of `E±` at `1̂`, the two lifts of `−1` and of `±i`, with the
/// polylocal relations among them.
pub fn collect_boundary_data(basis: &EigenBasis) -> Result<BoundaryData> {
    let params = basis.params();
    let ps = basis.polys();
    let dpm = basis.delta_pm()?;
    let one = basis.values(CoverPoint::ONE)?;
    let a = basis.values(CoverPoint::MINUS_ONE_C)?;
    let b = basis.values(CoverPoint::MINUS_ONE_P)?;
    let ei = basis.values(CoverPoint::I)?;
    let emi = basis.values(CoverPoint::MINUS_I)?;
    let mu = params.mu;
    let prod1 = one[0] * one[1];
    let (sums, diffs) = sums_and_diffs(ps, one, ei, emi, params.two_omega, &dpm);
    let residuals = BoundaryResiduals {
        minus_one: scaled_diff(a[0] * b[1] + a[1] * b[0], 2.0 * (-4.0 * mu).exp() * prod1),
        imaginary_unit: scaled_diff(ei[0] * emi[1] + ei[1] * emi[0], 2.0 * (-2.0 * mu).exp() * prod1),
        cross_ratio: scaled_diff(dpm.plus / one[0] * (a[0] - b[0]), dpm.minus / one[1] * (a[1] - b[1])),
        sums: scaled_diff(sums[0], a[0] + b[0]).max(scaled_diff(sums[1], a[1] + b[1])),
        diffs: scaled_diff(diffs[0], a[0] - b[0]).max(scaled_diff(diffs[1], a[1] - b[1])),
    };
    Ok(BoundaryData {
        one,
        minus_one_c: a,
        minus_one_p: b,
        i: ei,
        minus_i: emi,
        mu,
        two_omega: params.two_omega,
        ell: params.ell,
        delta: ps.delta,
        delta_plus: dpm.plus,
        delta_minus: dpm.minus,
        sums,
        diffs,
        residuals,
    })
}

/// `{{E₁,E₂}}(ẑ, ẑ̃) = E₁(ẑ)E₂(ẑ̃) + E₂(ẑ)E₁(ẑ̃) − 2e^{μ(z+1/z−2)}E₁(1̂)E₂(1̂)`.
pub fn bracket(s1: &SolutionHandle<'_>, s2: &SolutionHandle<'_>, at: CoverPoint, tilde: CoverPoint) -> Result<C> {
    use crate::solver::CoverFunction;
    let mu = s1.basis.params().mu;
    let z = at.project();
    let v = |s: &SolutionHandle<'_>, p| s.value(p);
    Ok(v(s1, at)? * v(s2, tilde)? + v(s2, at)? * v(s1, tilde)?
        - 2.0 * (mu * (z + 1.0 / z - 2.0)).exp() * v(s1, CoverPoint::ONE)? * v(s2, CoverPoint::ONE)?)
}

/// `+` or `−` choice in the polylocal functionals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The functional `W±[𝒜, ℬ; E](ẑ, 1/ẑ)` in its `r`-based form.
pub fn w_functional(sign: Sign, a_field: C, b_field: C, s: &SolutionHandle<'_>, at: CoverPoint) -> Result<C> {
    use crate::solver::CoverFunction;
    let params = s.basis.params();
    let ps = s.basis.polys();
    let (sg, tw) = (sign.value(), params.two_omega);
    let par = params.parity();
    let l = params.ell as i32;
    let z = at.project();
    let zi = 1.0 / z;
    let e = s.value(at)?;
    let et = s.value(at.inv())?;
    Ok(sg * tw * par * at.powi(2 * (1 - l)) * ps.r.eval_c64(z) * a_field * e
        - tw * par * at.powi(2 * (l - 1)) * ps.r.eval_c64(zi) * b_field * et
        - sg * at.powi(l - 1) * ps.p.eval_c64(zi) * b_field * e
        + at.powi(1 - l) * ps.p.eval_c64(z) * a_field * et)
}

/// Representations of Θ_A and Θ_B in the `E±` basis.
pub fn matrices_ab(bd: &BoundaryData) -> Result<(Matrix2, Matrix2)> {
    let (a, b, e1) = (bd.a(), bd.b(), bd.one);
    if bd.delta_plus.norm() == 0.0 || bd.delta_minus.norm() == 0.0 {
        return Err(Error::DegenerateParams("delta_plus or delta_minus vanishes".into()));
    }
    let all = [a, b, e1].concat();
    if !all.iter().all(|x| x.is_finite()) || e1.iter().any(|x| x.norm() == 0.0) {
        return Err(Error::DegenerateParams("boundary values are not usable".into()));
    }
    let pre = (2.0 * bd.mu).exp() / (2.0 * bd.two_omega);
    let d = Matrix2::diag(bd.delta_minus / e1[1], bd.delta_plus / e1[0]);
    let core = Matrix2::new(a[1] - b[1], -(a[0] + b[0]), a[1] + b[1], -(a[0] - b[0]));
    let am = (d * core).scale(pre);
    Ok((am, am * Matrix2::theta_c()))
}

/// Representation of the monodromy `ẑ ↦ Mẑ`.
pub fn matrix_m(bd: &BoundaryData) -> Matrix2 {
    let (a, b, e1) = (bd.a(), bd.b(), bd.one);
    let pre = (4.0 * bd.mu).exp() / (2.0 * e1[0] * e1[1]);
    let diag = a[0] * a[1] + b[0] * b[1];
    Matrix2::new(diag, a[0] * a[0] - b[0] * b[0], a[1] * a[1] - b[1] * b[1], diag).scale(pre)
}

/// `𝐌^k (E₊, E₋)ᵀ`: the basis values at `M^k ẑ` from those at `ẑ`.
pub fn continue_monodromy(m: &Matrix2, values: [C; 2], k: i64) -> Result<[C; 2]> {
    Ok(m.pow(k)?.apply(values))
}

/// Basis values at `(ρ, φ+π)` and `(ρ, φ−π)` for `ẑ = (ρ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeftHalf {
    /// At `(ρ, φ+π)`.
    pub counterclockwise: [C; 2],
    /// At `(ρ, φ−π)`.
    pub clockwise: [C; 2],
}

/// Continues `E±` from `ẑ` in the right half-strip to the two lifts of
/// `−z`, using values at `ẑ` and `1/ẑ` only.
pub fn continue_left_half(
    at: CoverPoint,
    values: [C; 2],
    values_inv: [C; 2],
    bd: &BoundaryData,
    ps: &PolySet<C>,
) -> Result<LeftHalf> {
    if bd.delta_plus.norm() == 0.0 || bd.delta_minus.norm() == 0.0 {
        return Err(Error::DegenerateParams("delta_plus or delta_minus vanishes".into()));
    }
    let ell = bd.ell as i32;
    let z = at.project();
    let zi = 1.0 / z;
    let (dp, dm, e1) = (bd.delta_plus, bd.delta_minus, bd.one);
    let pref = 0.5 * at.powi(ell - 1) * (bd.mu * (2.0 - z - zi)).exp();
    let rt = bd.parity() * bd.two_omega * at.powi(ell - 1) * ps.r.eval_c64(zi);
    let pz = ps.p.eval_c64(zi);
    let (ez, ei) = (values, values_inv);
    let mut ccw = [ZERO; 2];
    let mut cw = [ZERO; 2];
    for (idx, sg) in [(0usize, 1.0f64), (1, -1.0)] {
        // a − sg·b and a + sg·b
        let (minus, plus) = if idx == 0 { (bd.diffs[0], bd.sums[0]) } else { (bd.sums[1], bd.diffs[1]) };
        let x = minus / (dm * e1[0]);
        let y = plus / (dp * e1[1]);
        ccw[idx] = pref * (rt * (-x * ei[0] + y * ei[1]) + pz * (x * ez[0] + y * ez[1]));
        cw[idx] = sg * pref * (rt * (x * ei[0] + y * ei[1]) + pz * (-x * ez[0] + y * ez[1]));
    }
    Ok(LeftHalf { counterclockwise: ccw, clockwise: cw })
}

/// `𝐌` read off from integration around one loop starting at `at`:
/// `[E(Mẑ), E'(Mẑ)] = 𝐌 [E(ẑ), E'(ẑ)]`.
pub fn loop_matrix(basis: &EigenBasis, at: CoverPoint) -> Result<Matrix2> {
    let [p0, m0] = basis.frames(at)?;
    let [p1, m1] = basis.frames(at.shifted(1))?;
    let x = Matrix2::new(p0.value, p0.deriv, m0.value, m0.deriv);
    let y = Matrix2::new(p1.value, p1.deriv, m1.value, m1.deriv);
    Ok(y * x.inverse()?)
}

/// All matrices and boundary data of one eigenbasis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyData {
    pub boundary: BoundaryData,
    pub a: Matrix2,
    pub b: Matrix2,
    pub m: Matrix2,
    /// Distinct monodromy eigenvalues and nonvanishing `Δ±` (within 1e−10).
    pub generic: bool,
}

/// Threshold for the genericity flag.
pub const GENERIC_TOL: f64 = 1e-10;

impl MonodromyData {
    pub fn new(basis: &EigenBasis) -> Result<Self> {
        let boundary = collect_boundary_data(basis)?;
        let (a, b) = matrices_ab(&boundary)?;
        let m = matrix_m(&boundary);
        let tr = m.trace();
        let distinct = (tr * tr - 4.0).norm() > GENERIC_TOL * tr.norm_sqr().max(1.0);
        let dpm_ok = boundary.delta_plus.norm() > GENERIC_TOL && boundary.delta_minus.norm() > GENERIC_TOL;
        Ok(MonodromyData { boundary, a, b, m, generic: distinct && dpm_ok })
    }
}

/// Evaluates `E±` anywhere on the cover from values in the right half-strip
/// `|φ| ≤ π/2` plus the matrix and boundary algebra.
pub struct Continuator<'a> {
    basis: &'a EigenBasis,
    data: MonodromyData,
}

impl<'a> Continuator<'a> {
    pub fn new(basis: &'a EigenBasis) -> Result<Self> {
        Self::with_data(basis, MonodromyData::new(basis)?)
    }

    /// Reuses data computed from another basis with the same parameters.
    pub fn with_data(basis: &'a EigenBasis, data: MonodromyData) -> Result<Self> {
        if !data.generic {
            return Err(Error::DegenerateParams("non-generic monodromy data".into()));
        }
        Ok(Continuator { basis, data })
    }

    pub fn data(&self) -> &MonodromyData {
        &self.data
    }

    /// `(E₊, E₋)` at `at`, touching the solver only inside `|φ| ≤ π/2`.
    pub fn eval(&self, at: CoverPoint) -> Result<[C; 2]> {
        let turns = ((at.phi + PI) / (2.0 * PI)).ceil() - 1.0;
        let mut phi0 = at.phi - 2.0 * PI * turns;
        let mut k = turns as i64;
        if phi0 <= -PI {
            phi0 += 2.0 * PI;
            k -= 1;
        }
        let base = CoverPoint::new(at.rho, phi0);
        let vals = if phi0.abs() <= PI / 2.0 {
            self.basis.values(base)?
        } else {
            let shift = if phi0 > 0.0 { -PI } else { PI };
            let right = CoverPoint::new(at.rho, phi0 + shift);
            let v = self.basis.values(right)?;
            let vi = self.basis.values(right.inv())?;
            let lh = continue_left_half(right, v, vi, &self.data.boundary, self.basis.polys())?;
            if phi0 > 0.0 {
                lh.counterclockwise
            } else {
                lh.clockwise
            }
        };
        continue_monodromy(&self.data.m, vals, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polys::HeunParams;
    use crate::solver::DEFAULT_TOL;

    fn data() -> (EigenBasis, MonodromyData) {
        let p = HeunParams::new(1, C::new(1.0, 0.0), C::new(0.5, 0.0)).unwrap();
        let b = EigenBasis::new(p, DEFAULT_TOL).unwrap();
        let d = MonodromyData::new(&b).unwrap();
        (b, d)
    }

    #[test]
    fn matrix_basics() {
        let m = Matrix2::new(C::new(1.0, 0.0), C::new(2.0, 1.0), C::new(0.0, -1.0), C::new(3.0, 0.0));
        let inv = m.inverse().unwrap();
        assert!((m * inv).max_diff(&Matrix2::IDENTITY) < 1e-15);
        assert!(m.pow(3).unwrap().max_diff(&(m * m * m)) < 1e-13);
        let (l1, l2) = m.eigenvalues();
        assert!((l1 + l2 - m.trace()).norm() < 1e-14 && (l1 * l2 - m.det()).norm() < 1e-13);
    }

    #[test]
    fn boundary_relations() {
        let (_, d) = data();
        assert!(d.boundary.residuals.max() < 1e-9, "{:?}", d.boundary.residuals);
    }

    #[test]
    fn determinants_and_squares() {
        let (_, d) = data();
        let delta = d.boundary.delta;
        assert!((d.a.det() - delta).norm() < 1e-8);
        assert!((d.a * d.a + Matrix2::IDENTITY.scale(delta)).max_abs() < 1e-8);
        assert_eq!(d.b * Matrix2::theta_c(), d.a);
        assert!((d.m.det() - 1.0).norm() < 1e-10);
        assert!((d.b * d.b).scale(1.0 / delta).rel_diff(&d.m) < 1e-8);
        let flipped = Matrix2::theta_c() * d.m * Matrix2::theta_c();
        assert!(d.m.inverse().unwrap().rel_diff(&flipped) < 1e-10);
    }

    #[test]
    fn continuation_identity_cases() {
        let (b, d) = data();
        let v = b.values(CoverPoint::new(1.3, 0.4)).unwrap();
        assert_eq!(continue_monodromy(&d.m, v, 0).unwrap(), v);
        let there = continue_monodromy(&d.m, v, -1).unwrap();
        let back = continue_monodromy(&d.m, there, 1).unwrap();
        // relative to the intermediate magnitude: the product cancels digits
        let size = there[0].norm().max(there[1].norm());
        let err = (back[0] - v[0]).norm().max((back[1] - v[1]).norm()) / size;
        assert!(err < 1e-12, "{err:e}");
    }

    #[test]
    fn left_half_at_unit() {
        let (b, d) = data();
        let one = CoverPoint::ONE;
        let lh = continue_left_half(one, d.boundary.one, d.boundary.one, &d.boundary, b.polys()).unwrap();
        for j in 0..2 {
            assert!(scaled_diff(lh.counterclockwise[j], d.boundary.minus_one_c[j]) < 1e-8);
            assert!(scaled_diff(lh.clockwise[j], d.boundary.minus_one_p[j]) < 1e-8);
        }
    }
}
