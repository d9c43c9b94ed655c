//! Bridge to the real phase equation `φ̇ + sin φ = B + A cos ωt`.
//!
//! On the lifted unit circle `ẑ = (1, ωt)` a solution of the phase equation is
//! `Φ = e^{iφ}` together with `𝓔 = e^{P}`, `P = ∫₀ᵗ cos φ`. Both extend
//! holomorphically to the cover, where `Φ` obeys the Riccati equation
//! `Φ' = (l/z + μ(1 + z⁻²))Φ − (Φ² − 1)/(2iωz)` and `2iω𝓔' = z⁻¹(Φ + Φ⁻¹)𝓔`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cover::CoverPoint;
use crate::error::{Error, Result};
use crate::monodromy::Matrix2;
use crate::ode::{Integrator, Options};
use crate::polys::{build_polys, delta_pm, HeunParams};
use crate::solver::EigenBasis;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Tolerance for recognizing `B/ω` as a negative integer.
pub const ORDER_TOL: f64 = 1e-9;
/// Denominator magnitude treated as a pole.
pub const POLE_TOL: f64 = 1e-13;
/// Magnitude of `cos` below which a secant is treated as singular.
pub const SECANT_TOL: f64 = 1e-10;

/// Drive amplitude `A`, bias `B` and frequency `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JosephsonParams {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
}

impl JosephsonParams {
    pub fn new(a: f64, b: f64, omega: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && omega.is_finite()) {
            return Err(Error::InvalidParams("A, B and omega must be finite".into()));
        }
        if a == 0.0 {
            return Err(Error::InvalidParams("A must be nonzero".into()));
        }
        if omega <= 0.0 {
            return Err(Error::InvalidParams("omega must be positive".into()));
        }
        Ok(JosephsonParams { a, b, omega })
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn l(&self) -> f64 {
        self.b / self.omega
    }

    pub fn mu(&self) -> f64 {
        self.a / (2.0 * self.omega)
    }

    pub fn lambda(&self) -> f64 {
        (2.0 * self.omega).powi(-2) - self.mu().powi(2)
    }

    /// `𝓁` when `B/ω = −𝓁` for a positive integer `𝓁`.
    pub fn ell(&self) -> Option<u32> {
        let l = self.l();
        let n = (-l).round();
        if n >= 1.0 && (l + n).abs() <= ORDER_TOL * n.max(1.0) && n <= u32::MAX as f64 {
            Some(n as u32)
        } else {
            None
        }
    }

    pub fn require_ell(&self) -> Result<u32> {
        self.ell().ok_or(Error::NonIntegerOrder(self.l()))
    }

    /// Right-hand side `(φ̇, Ṗ)`.
    pub fn rhs(&self, t: f64, phi: f64) -> [f64; 2] {
        [self.b + self.a * (self.omega * t).cos() - phi.sin(), phi.cos()]
    }

    pub fn model(&self) -> PhaseModel {
        PhaseModel { l: self.l(), mu: C::new(self.mu(), 0.0), omega: C::new(self.omega, 0.0) }
    }
}

/// Heun-side image of Josephson parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeunMapping {
    /// `l = B/ω`.
    pub l: f64,
    pub mu: f64,
    pub lambda: f64,
    /// Present when `l = −𝓁` for a positive integer `𝓁`.
    pub params: Option<HeunParams>,
}

impl HeunMapping {
    /// Flag raised for non-integer order; not an error for the mapping itself.
    pub fn non_integer_order(&self) -> bool {
        self.params.is_none()
    }

    pub fn require(&self) -> Result<HeunParams> {
        self.params.ok_or(Error::NonIntegerOrder(self.l))
    }
}

/// `l = B/ω`, `μ = A/(2ω)`, `λ = (2ω)⁻² − μ²`.
pub fn params_to_heun(jp: &JosephsonParams) -> Result<HeunMapping> {
    let (l, mu, lambda) = (jp.l(), jp.mu(), jp.lambda());
    let params = match jp.ell() {
        Some(ell) => Some(HeunParams::new(ell, C::new(lambda, 0.0), C::new(mu, 0.0))?),
        None => None,
    };
    Ok(HeunMapping { l, mu, lambda, params })
}

/// Inverse of [`params_to_heun`]; needs real `μ` and real positive `λ + μ²`.
pub fn heun_to_params(hp: &HeunParams) -> Result<JosephsonParams> {
    let sum = hp.sum();
    let scale = hp.lambda.norm() + hp.mu.norm_sqr();
    if sum.im.abs() > 1e-12 * scale.max(1.0) || sum.re <= 0.0 {
        return Err(Error::NonPositiveSum);
    }
    if hp.mu.im.abs() > 1e-12 * hp.mu.norm().max(1.0) {
        return Err(Error::InvalidParams("mu must be real".into()));
    }
    let omega = 0.5 / sum.re.sqrt();
    JosephsonParams::new(2.0 * omega * hp.mu.re, -(hp.ell as f64) * omega, omega)
}

/// Coefficients of the holomorphic equations for `Φ` and `𝓔`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseModel {
    pub l: f64,
    pub mu: C,
    pub omega: C,
}

impl PhaseModel {
    pub fn from_heun(hp: &HeunParams) -> Self {
        PhaseModel { l: hp.order() as f64, mu: hp.mu, omega: hp.two_omega / 2.0 }
    }

    /// `Φ'` demanded by the Riccati equation.
    pub fn riccati_rhs(&self, z: C, phi: C) -> C {
        (self.l / z + self.mu * (1.0 + 1.0 / (z * z))) * phi - (phi * phi - 1.0) / (2.0 * I * self.omega * z)
    }

    /// Scaled residual `|Φ' − rhs| / max(1, Σ|terms|)`.
    pub fn riccati_residual(&self, z: C, phi: C, dphi: C) -> f64 {
        let a = (self.l / z + self.mu * (1.0 + 1.0 / (z * z))) * phi;
        let b = (phi * phi - 1.0) / (2.0 * I * self.omega * z);
        (dphi - a + b).norm() / (dphi.norm() + a.norm() + b.norm()).max(1.0)
    }

    /// Scaled residual of `2iω𝓔' = z⁻¹(Φ + Φ⁻¹)𝓔`.
    pub fn ep_residual(&self, z: C, phi: C, ep: C, dep: C) -> f64 {
        let lhs = 2.0 * I * self.omega * dep;
        let rhs = (phi + 1.0 / phi) * ep / z;
        (lhs - rhs).norm() / (lhs.norm() + rhs.norm()).max(1.0)
    }
}

/// A solution `(Φ, 𝓔)` on the cover, with `z`-derivatives.
pub trait PhaseFunction {
    /// `(Φ, Φ')`.
    fn phi_jet(&self, at: CoverPoint) -> Result<(C, C)>;
    /// `(𝓔, 𝓔')`.
    fn ep_jet(&self, at: CoverPoint) -> Result<(C, C)>;

    fn phi(&self, at: CoverPoint) -> Result<C> {
        Ok(self.phi_jet(at)?.0)
    }

    fn ep(&self, at: CoverPoint) -> Result<C> {
        Ok(self.ep_jet(at)?.0)
    }
}

/// `(c, s) = (cos(α/2), sin(α/2))`.
fn half_angle(alpha: f64) -> (f64, f64) {
    ((alpha / 2.0).cos(), (alpha / 2.0).sin())
}

/// `α` producing `φ(0) = φ₀` from a basis with `E±(1̂) = 1`.
pub fn alpha_for_phi0(phi0: f64) -> f64 {
    phi0 + FRAC_PI_2
}

/// `Φ = −i z^{−𝓁} N(ẑ)/Ñ(1/ẑ)` with `N = cE₊ + isE₋`, `Ñ = cE₊ − isE₋`, from
/// values at `ẑ` and `1/ẑ`.
pub fn phi_from_values(alpha: f64, ell: f64, at: CoverPoint, e_at: [C; 2], e_inv: [C; 2]) -> Result<C> {
    let (c, s) = half_angle(alpha);
    let num = c * e_at[0] + I * s * e_at[1];
    let den = c * e_inv[0] - I * s * e_inv[1];
    if den.norm() < POLE_TOL {
        return Err(Error::PoleHit);
    }
    Ok(-I * at.pow(C::new(-ell, 0.0)) * num / den)
}

/// `𝓔 = e^{μ(2−z−1/z)} N(ẑ)Ñ(1/ẑ) / (c²E₊(1̂)² + s²E₋(1̂)²)`.
pub fn ep_from_values(alpha: f64, mu: C, at: CoverPoint, e_at: [C; 2], e_inv: [C; 2], e_one: [C; 2]) -> Result<C> {
    let (c, s) = half_angle(alpha);
    let norm = c * c * e_one[0] * e_one[0] + s * s * e_one[1] * e_one[1];
    if norm.norm() < POLE_TOL {
        return Err(Error::PoleHit);
    }
    let z = at.project();
    let num = c * e_at[0] + I * s * e_at[1];
    let den = c * e_inv[0] - I * s * e_inv[1];
    Ok((mu * (2.0 - z - 1.0 / z)).exp() * num * den / norm)
}

/// `Φ` built from an eigenbasis.
pub fn phi_from_basis(alpha: f64, basis: &EigenBasis, at: CoverPoint) -> Result<C> {
    let (e_at, e_inv) = (basis.values(at)?, basis.values(at.inv())?);
    phi_from_values(alpha, basis.params().ell as f64, at, e_at, e_inv)
}

/// `𝓔` built from an eigenbasis.
pub fn ep_from_basis(alpha: f64, basis: &EigenBasis, at: CoverPoint) -> Result<C> {
    let (e_at, e_inv) = (basis.values(at)?, basis.values(at.inv())?);
    let e_one = basis.values(CoverPoint::ONE)?;
    ep_from_values(alpha, basis.params().mu, at, e_at, e_inv, e_one)
}

/// Holomorphic `(Φ, 𝓔)` generated by an eigenbasis and `α`.
pub struct BasisPhase<'a> {
    pub basis: &'a EigenBasis,
    pub alpha: f64,
}

impl BasisPhase<'_> {
    fn pieces(&self, at: CoverPoint) -> Result<(C, C, C, C)> {
        let (c, s) = half_angle(self.alpha);
        let inv = at.inv();
        let [fp, fm] = self.basis.frames(at)?;
        let [gp, gm] = self.basis.frames(inv)?;
        let num = c * fp.value + I * s * fm.value;
        let dnum = c * fp.deriv + I * s * fm.deriv;
        let den = c * gp.value - I * s * gm.value;
        // d/dz of Ñ(1/z)
        let z = at.project();
        let dden = -(c * gp.deriv - I * s * gm.deriv) / (z * z);
        if den.norm() < POLE_TOL {
            return Err(Error::PoleHit);
        }
        Ok((num, dnum, den, dden))
    }
}

impl PhaseFunction for BasisPhase<'_> {
    fn phi_jet(&self, at: CoverPoint) -> Result<(C, C)> {
        let ell = self.basis.params().ell as f64;
        let (num, dnum, den, dden) = self.pieces(at)?;
        let z = at.project();
        let pre = -I * at.pow(C::new(-ell, 0.0));
        let v = pre * num / den;
        let d = v * (-ell / z + dnum / num - dden / den);
        let d = if num.norm() == 0.0 { pre * dnum / den } else { d };
        Ok((v, d))
    }

    fn ep_jet(&self, at: CoverPoint) -> Result<(C, C)> {
        let mu = self.basis.params().mu;
        let e_one = self.basis.values(CoverPoint::ONE)?;
        let (c, s) = half_angle(self.alpha);
        let norm = c * c * e_one[0] * e_one[0] + s * s * e_one[1] * e_one[1];
        if norm.norm() < POLE_TOL {
            return Err(Error::PoleHit);
        }
        let (num, dnum, den, dden) = self.pieces(at)?;
        let z = at.project();
        let g = (mu * (2.0 - z - 1.0 / z)).exp();
        let dg = g * mu * (1.0 / (z * z) - 1.0);
        Ok((g * num * den / norm, (dg * num * den + g * dnum * den + g * num * dden) / norm))
    }
}

/// `Φ ↦ −Φ(1/ẑ)⁻¹`, `𝓔 ↦ 𝓔(1/ẑ)`.
pub struct ThetaCPhase<F> {
    pub inner: F,
}

/// Holomorphic form of the `Θ_C`-induced map.
pub fn theta_c_phase<F: PhaseFunction>(inner: F) -> ThetaCPhase<F> {
    ThetaCPhase { inner }
}

impl<F: PhaseFunction> PhaseFunction for ThetaCPhase<F> {
    fn phi_jet(&self, at: CoverPoint) -> Result<(C, C)> {
        let (v, d) = self.inner.phi_jet(at.inv())?;
        if v.norm() < POLE_TOL {
            return Err(Error::PoleHit);
        }
        let z = at.project();
        Ok((-1.0 / v, -d / (v * v * z * z)))
    }

    fn ep_jet(&self, at: CoverPoint) -> Result<(C, C)> {
        let (v, d) = self.inner.ep_jet(at.inv())?;
        let z = at.project();
        Ok((v, -d / (z * z)))
    }
}

impl<F: PhaseFunction + ?Sized> PhaseFunction for &F {
    fn phi_jet(&self, at: CoverPoint) -> Result<(C, C)> {
        (**self).phi_jet(at)
    }
    fn ep_jet(&self, at: CoverPoint) -> Result<(C, C)> {
        (**self).ep_jet(at)
    }
}

/// Values at the five instants every period formula depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPeriod {
    /// `φ(0)`.
    pub phi0: f64,
    /// `φ(T/2)`.
    pub phi_plus: f64,
    /// `φ(−T/2)`.
    pub phi_minus: f64,
    /// `P(T/2)`.
    pub p_plus: f64,
    /// `P(−T/2)`.
    pub p_minus: f64,
}

/// A solution of the phase equation sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrajectory {
    pub params: JosephsonParams,
    pub t_grid: Vec<f64>,
    /// Unwrapped phase.
    pub phi: Vec<f64>,
    /// `P(t) = ∫₀ᵗ cos φ`.
    pub p: Vec<f64>,
    pub phi0: f64,
    pub tol: f64,
}

/// CSV header of [`PhaseTrajectory::csv_rows`].
pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "phi", "P", "re_exp_iphi", "im_exp_iphi"];

/// `t_k = kT/(2n)` for `k = −n..=n`.
pub fn symmetric_grid(period: f64, n: usize) -> Vec<f64> {
    let n = n.max(1) as i64;
    (-n..=n).map(|k| k as f64 * period / (2 * n) as f64).collect()
}

fn step_failure(t: f64) -> Error {
    Error::StepFailure { re: t, im: 0.0 }
}

/// Integrates `(φ, P)` from `t = 0` in both directions and samples on the grid.
pub fn integrate_phase(jp: &JosephsonParams, phi0: f64, t_grid: &[f64], tol: f64) -> Result<PhaseTrajectory> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::InvalidParams("time grid must be strictly ascending".into()));
    }
    if !(t_grid[0] <= 0.0 && *t_grid.last().unwrap() >= 0.0) {
        return Err(Error::InvalidParams("time grid must contain t = 0 in its span".into()));
    }
    if tol.is_nan() || tol <= 0.0 || !phi0.is_finite() {
        return Err(Error::InvalidParams("tolerance must be positive and phi0 finite".into()));
    }
    let n = t_grid.len();
    let mut phi = vec![0.0; n];
    let mut p = vec![0.0; n];
    let jp2 = *jp;
    let f = move |t: f64, y: &[f64; 2]| jp2.rhs(t, y[0]);
    let split = t_grid.partition_point(|&t| t < 0.0);
    let mut fwd = Integrator::new(f, 0.0, [phi0, 0.0], Options::with_tol(tol));
    for k in split..n {
        let y = fwd.advance_to(t_grid[k]).map_err(|e| step_failure(e.t))?;
        phi[k] = y[0];
        p[k] = y[1];
    }
    let mut back = Integrator::new(f, 0.0, [phi0, 0.0], Options::with_tol(tol));
    for k in (0..split).rev() {
        let y = back.advance_to(t_grid[k]).map_err(|e| step_failure(e.t))?;
        phi[k] = y[0];
        p[k] = y[1];
    }
    Ok(PhaseTrajectory { params: *jp, t_grid: t_grid.to_vec(), phi, p, phi0, tol })
}

/// Trajectory over `[−T/2, T/2]` on [`symmetric_grid`].
pub fn integrate_period(jp: &JosephsonParams, phi0: f64, n_half: usize, tol: f64) -> Result<PhaseTrajectory> {
    integrate_phase(jp, phi0, &symmetric_grid(jp.period(), n_half), tol)
}

impl PhaseTrajectory {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.params.period()
    }

    pub fn exp_iphi(&self, k: usize) -> C {
        C::from_polar(1.0, self.phi[k])
    }

    /// `(φ(t), P(t))` at any time, integrating from the nearest grid point.
    pub fn state_at(&self, t: f64) -> Result<(f64, f64)> {
        let k = self.nearest(t);
        if self.t_grid[k] == t {
            return Ok((self.phi[k], self.p[k]));
        }
        let jp = self.params;
        let y = Integrator::new(
            move |s, y: &[f64; 2]| jp.rhs(s, y[0]),
            self.t_grid[k],
            [self.phi[k], self.p[k]],
            Options::with_tol(self.tol),
        )
        .advance_to(t)
        .map_err(|e| step_failure(e.t))?;
        Ok((y[0], y[1]))
    }

    fn nearest(&self, t: f64) -> usize {
        let k = self.t_grid.partition_point(|&s| s < t);
        if k == 0 {
            0
        } else if k == self.len() {
            k - 1
        } else if (self.t_grid[k] - t).abs() < (t - self.t_grid[k - 1]).abs() {
            k
        } else {
            k - 1
        }
    }

    fn index_of(&self, t: f64) -> Option<usize> {
        let k = self.nearest(t);
        let tol = 1e-9 * self.period();
        ((self.t_grid[k] - t).abs() <= tol).then_some(k)
    }

    /// Whether the grid is symmetric about `0` and contains `0` and `±T/2`.
    pub fn covers_period(&self) -> bool {
        let n = self.len();
        let tol = 1e-9 * self.period();
        n % 2 == 1
            && (0..n).all(|k| (self.t_grid[k] + self.t_grid[n - 1 - k]).abs() <= tol)
            && (self.t_grid[n - 1] - self.period() / 2.0).abs() <= tol
    }

    fn require_period(&self) -> Result<()> {
        if self.covers_period() {
            Ok(())
        } else {
            Err(Error::InvalidParams("trajectory must be sampled on a symmetric grid over [-T/2, T/2]".into()))
        }
    }

    /// Half-period data read from the grid.
    pub fn half_period(&self) -> Result<HalfPeriod> {
        let h = self.period() / 2.0;
        let (k0, kp, km) = match (self.index_of(0.0), self.index_of(h), self.index_of(-h)) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(Error::InvalidParams("grid must contain 0 and ±T/2".into())),
        };
        Ok(HalfPeriod {
            phi0: self.phi[k0],
            phi_plus: self.phi[kp],
            phi_minus: self.phi[km],
            p_plus: self.p[kp],
            p_minus: self.p[km],
        })
    }

    pub fn csv_rows(&self) -> Vec<[f64; 5]> {
        (0..self.len())
            .map(|k| {
                let e = self.exp_iphi(k);
                [self.t_grid[k], self.phi[k], self.p[k], e.re, e.im]
            })
            .collect()
    }
}

/// Continuous branch of `angle` nearest to `prev`.
pub fn unwrap_near(prev: f64, angle: f64) -> f64 {
    angle + 2.0 * PI * ((prev - angle) / (2.0 * PI)).round()
}

/// Unwraps a sequence of unit phases starting from `start`; fails when a
/// step exceeds `π/2`.
fn unwrap_sequence(start: f64, values: impl IntoIterator<Item = C>) -> Result<Vec<f64>> {
    let mut prev = start;
    let mut out = Vec::new();
    for v in values {
        let a = unwrap_near(prev, v.arg());
        if (a - prev).abs() > FRAC_PI_2 {
            return Err(Error::BranchLoss(a - prev));
        }
        out.push(a);
        prev = a;
    }
    Ok(out)
}

/// Square root continued from `prev`; the radicand may turn by at most `π/2`.
fn tracked_sqrt(prev: Option<C>, v: C) -> Result<C> {
    let r = v.sqrt();
    match prev {
        None => Ok(r),
        Some(p) => {
            let r = if (r - p).norm() <= (r + p).norm() { r } else { -r };
            // phase jump of the radicand
            let jump = 2.0 * (r / p).arg().abs();
            if jump > FRAC_PI_2 {
                Err(Error::BranchLoss(jump))
            } else {
                Ok(r)
            }
        }
    }
}

/// `(Φ, 𝓔)` at `ẑ` and at `1/ẑ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSample {
    pub at: CoverPoint,
    pub phi: C,
    pub ep: C,
    pub phi_inv: C,
    pub ep_inv: C,
}

/// Samples of a circle trajectory, ordered outward from `t = 0` in one direction.
pub fn trajectory_samples(traj: &PhaseTrajectory, forward: bool) -> Result<Vec<PhaseSample>> {
    traj.require_period()?;
    let n = traj.len();
    let mid = n / 2;
    let idx: Vec<usize> = if forward { (mid..n).collect() } else { (0..=mid).rev().collect() };
    Ok(idx
        .into_iter()
        .map(|k| {
            let m = n - 1 - k;
            PhaseSample {
                at: CoverPoint::new(1.0, traj.params.omega * traj.t_grid[k]),
                phi: traj.exp_iphi(k),
                ep: C::new(traj.p[k].exp(), 0.0),
                phi_inv: traj.exp_iphi(m),
                ep_inv: C::new(traj.p[m].exp(), 0.0),
            }
        })
        .collect())
}

/// `E± = h(e^{±iπ/4}X + e^{∓iπ/4}Y)` with `X = (𝓔Φ)^{1/2}`, `Y = (𝓔(1/ẑ)/Φ(1/ẑ))^{1/2}`
/// and `h = ½e^{μ(z+1/z−2)/2} ẑ^{𝓁/2}`; the square roots are continued along
/// the samples, which must start at `1̂`.
pub fn basis_from_phi(ell: f64, mu: C, samples: &[PhaseSample]) -> Result<Vec<[C; 2]>> {
    let first = samples.first().ok_or_else(|| Error::InvalidParams("no samples".into()))?;
    if !first.at.approx_eq(&CoverPoint::ONE, 1e-14) {
        return Err(Error::InvalidParams("samples must start at the lifted unit".into()));
    }
    if (first.phi - I).norm() < 1e-10 {
        return Err(Error::DegenerateInitial("plus"));
    }
    if (first.phi + I).norm() < 1e-10 {
        return Err(Error::DegenerateInitial("minus"));
    }
    let a = C::from_polar(1.0, FRAC_PI_4);
    let (mut x_prev, mut y_prev) = (None, None);
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        if s.phi_inv.norm() == 0.0 {
            return Err(Error::PoleHit);
        }
        let x = tracked_sqrt(x_prev, s.ep * s.phi)?;
        let y = tracked_sqrt(y_prev, s.ep_inv / s.phi_inv)?;
        x_prev = Some(x);
        y_prev = Some(y);
        let z = s.at.project();
        let h = 0.5 * (mu * (z + 1.0 / z - 2.0) / 2.0).exp() * s.at.pow(C::new(ell / 2.0, 0.0));
        out.push([h * (a * x + a.conj() * y), h * (a.conj() * x + a * y)]);
    }
    Ok(out)
}

/// `E±(1̂) = cos(φ(0)/2 ± π/4)` for the normalization of [`basis_from_phi`].
pub fn basis_at_unit(phi0: f64) -> [f64; 2] {
    [(phi0 / 2.0 + FRAC_PI_4).cos(), (phi0 / 2.0 - FRAC_PI_4).cos()]
}

/// Circle form of the `Θ_C` map: `φ(t) ↦ π − φ(−t)`, `P(t) ↦ P(−t)`.
pub fn theta_c_trajectory(traj: &PhaseTrajectory) -> Result<PhaseTrajectory> {
    traj.require_period()?;
    let n = traj.len();
    Ok(PhaseTrajectory {
        params: traj.params,
        t_grid: traj.t_grid.clone(),
        phi: (0..n).map(|k| PI - traj.phi[n - 1 - k]).collect(),
        p: (0..n).map(|k| traj.p[n - 1 - k]).collect(),
        phi0: PI - traj.phi0,
        tol: traj.tol,
    })
}

/// Monodromy matrix in the frame of [`basis_from_phi`], from half-period data.
pub fn phase_monodromy_from(hp: &HalfPeriod, ell: u32) -> Result<Matrix2> {
    let c0 = hp.phi0.cos();
    if c0.abs() < SECANT_TOL {
        return Err(Error::SecantSingular("cos phi(0) vanishes".into()));
    }
    let (bp, bm, g) = betas(hp);
    let pre = C::new(if ell % 2 == 0 { 1.0 } else { -1.0 } / c0, 0.0);
    Ok(Matrix2::new(C::new(bp, 0.0), I * (bm + g), I * (-bm + g), C::new(bp, 0.0)).scale(pre))
}

/// `(β₊, β₋, γ)`.
fn betas(hp: &HalfPeriod) -> (f64, f64, f64) {
    let a = hp.p_plus.exp() * hp.phi_plus.cos();
    let b = hp.p_minus.exp() * hp.phi_minus.cos();
    let g = ((hp.p_plus + hp.p_minus) / 2.0).exp() * ((hp.phi_plus - hp.phi_minus) / 2.0).sin();
    (0.5 * (a + b), 0.5 * (a - b), g)
}

/// Monodromy matrix of a trajectory over `[−T/2, T/2]`.
pub fn phase_monodromy_matrix(traj: &PhaseTrajectory) -> Result<Matrix2> {
    let ell = traj.params.require_ell()?;
    phase_monodromy_from(&traj.half_period()?, ell)
}

/// `N⁻¹𝐌N` with `N = diag(E±(1̂))`, the matrix in the frame with `E±(1̂) = 1`.
pub fn to_unit_frame(m: &Matrix2, phi0: f64) -> Result<Matrix2> {
    let [a, b] = basis_at_unit(phi0);
    if a.abs() < SECANT_TOL || b.abs() < SECANT_TOL {
        return Err(Error::DegenerateInitial(if a.abs() < SECANT_TOL { "plus" } else { "minus" }));
    }
    let n = Matrix2::diag(C::new(a, 0.0), C::new(b, 0.0));
    let n_inv = Matrix2::diag(C::new(1.0 / a, 0.0), C::new(1.0 / b, 0.0));
    Ok(n_inv * *m * n)
}

/// `e^{iφ(t±T)}` and `e^{P(t±T)}` from values at `t` and `−t`.
///
/// Returns `None` for the `P` part when `cos((φ(t)+φ(−t))/2)` is too small.
pub fn shift_period(hp: &HalfPeriod, sign: i32, state: (f64, f64), mirror: (f64, f64)) -> (C, Option<f64>) {
    let (f, p) = state;
    let (fn_, pn) = mirror;
    let sg = if sign >= 0 { 1.0 } else { -1.0 };
    let (pps, pms, fs) =
        if sg > 0.0 { (hp.p_plus, hp.p_minus, hp.phi_plus) } else { (hp.p_minus, hp.p_plus, hp.phi_minus) };
    let cs = fs.cos();
    let sd = ((hp.phi_plus - hp.phi_minus) / 2.0).sin();
    let num = (pps / 2.0).exp() * cs * C::from_polar((p / 2.0).exp(), f / 2.0)
        + sg * I * (pms / 2.0).exp() * sd * C::from_polar((pn / 2.0).exp(), -fn_ / 2.0);
    let e_iphi = num / num.conj();
    let cp = ((fn_ + f) / 2.0).cos();
    let cpm = ((hp.phi_plus + hp.phi_minus) / 2.0).cos();
    let ep = if cp.abs() < SECANT_TOL || cpm.abs() < SECANT_TOL {
        None
    } else {
        let brace = pps.exp() * cs * cs * ((p - pn) / 2.0).exp()
            + pms.exp() * sd * sd * ((pn - p) / 2.0).exp()
            + sg * 2.0 * ((hp.p_plus + hp.p_minus) / 2.0).exp() * sd * cs * ((f + fn_) / 2.0).sin();
        Some(hp.phi0.cos() * (-pms).exp() / (cpm * cpm) * brace / cp)
    };
    (e_iphi, ep)
}

/// Trajectory over `(−3T/2, 3T/2)` built algebraically from one period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedPhase {
    pub trajectory: PhaseTrajectory,
    /// Times whose values came from direct integration instead.
    pub fallback: Vec<f64>,
}

/// Extends a trajectory on `[−T/2, T/2]` to the two adjacent periods.
pub fn extend_phase(traj: &PhaseTrajectory) -> Result<ExtendedPhase> {
    traj.require_period()?;
    let hp = traj.half_period()?;
    let period = traj.period();
    let n = traj.len();
    let mut fallback = Vec::new();
    let mut blocks = Vec::new();
    for sign in [-1i32, 1] {
        let mut e_iphi = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n);
        for k in 0..n {
            let m = n - 1 - k;
            let (e, ep) = shift_period(&hp, sign, (traj.phi[k], traj.p[k]), (traj.phi[m], traj.p[m]));
            let t_new = traj.t_grid[k] + sign as f64 * period;
            match ep {
                Some(v) if v > 0.0 && v.is_finite() && e.is_finite() => {
                    e_iphi.push(e);
                    p.push(v.ln());
                }
                _ => {
                    let (f, q) = traj.state_at(t_new)?;
                    fallback.push(t_new);
                    e_iphi.push(C::from_polar(1.0, f));
                    p.push(q);
                }
            }
        }
        // anchor: the shifted block meets the original at t = ±T/2
        let (start, order): (f64, Vec<usize>) =
            if sign > 0 { (hp.phi_plus, (0..n).collect()) } else { (hp.phi_minus, (0..n).rev().collect()) };
        let unwrapped = unwrap_sequence(start, order.iter().map(|&k| e_iphi[k]))?;
        let mut phi = vec![0.0; n];
        for (j, &k) in order.iter().enumerate() {
            phi[k] = unwrapped[j];
        }
        blocks.push((sign, phi, p));
    }
    let mut t_grid = Vec::with_capacity(3 * n);
    let mut phi = Vec::with_capacity(3 * n);
    let mut p = Vec::with_capacity(3 * n);
    let (_, lphi, lp) = &blocks[0];
    let (_, rphi, rp) = &blocks[1];
    // skip duplicated junction points
    for k in 0..n - 1 {
        t_grid.push(traj.t_grid[k] - period);
        phi.push(lphi[k]);
        p.push(lp[k]);
    }
    t_grid.extend_from_slice(&traj.t_grid);
    phi.extend_from_slice(&traj.phi);
    p.extend_from_slice(&traj.p);
    for k in 1..n {
        t_grid.push(traj.t_grid[k] + period);
        phi.push(rphi[k]);
        p.push(rp[k]);
    }
    Ok(ExtendedPhase {
        trajectory: PhaseTrajectory { params: traj.params, t_grid, phi, p, phi0: traj.phi0, tol: traj.tol },
        fallback,
    })
}

/// Constants of the `Θ_A`/`Θ_B` phase maps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaPhaseConstants {
    pub u_plus: C,
    pub u_minus: C,
    pub v_plus: C,
    pub v_minus: C,
    pub w_plus: f64,
    pub w_minus: f64,
    pub big_u: C,
    pub big_v: C,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub gamma_phase: f64,
    pub delta_plus: C,
    pub delta_minus: C,
}

/// Constants from half-period data and `Δ±`.
pub fn theta_phase_constants(hp: &HalfPeriod, ell: u32, delta_plus: C, delta_minus: C) -> ThetaPhaseConstants {
    let sgn = if ell % 2 == 0 { 1.0 } else { -1.0 };
    let e = |x: f64| C::from_polar(1.0, x);
    let (fp, fm, f0) = (hp.phi_plus, hp.phi_minus, hp.phi0);
    let u_plus = e(fp / 2.0) + sgn * I * e(-fp / 2.0);
    let u_minus = e(fp / 2.0) - sgn * I * e(-fp / 2.0);
    let v_plus = sgn * e(fm / 2.0) + I * e(-fm / 2.0);
    let v_minus = sgn * e(fm / 2.0) - I * e(-fm / 2.0);
    let w_plus = (f0 / 2.0).cos() + (f0 / 2.0).sin();
    let w_minus = (f0 / 2.0).cos() - (f0 / 2.0).sin();
    let (ep, em) = ((hp.p_plus / 2.0).exp(), (hp.p_minus / 2.0).exp());
    let big_u = 2.0 * ep * (delta_plus * u_plus * w_plus - I * delta_minus * u_minus * w_minus);
    let big_v =
        delta_plus * w_plus * (ep * u_plus + em * v_plus) + I * delta_minus * w_minus * (ep * u_minus + em * v_minus);
    let (beta_plus, beta_minus, gamma_phase) = betas(hp);
    ThetaPhaseConstants {
        u_plus,
        u_minus,
        v_plus,
        v_minus,
        w_plus,
        w_minus,
        big_u,
        big_v,
        beta_plus,
        beta_minus,
        gamma_phase,
        delta_plus,
        delta_minus,
    }
}

/// Constants for a trajectory over `[−T/2, T/2]`; needs integer order.
pub fn trajectory_constants(traj: &PhaseTrajectory) -> Result<ThetaPhaseConstants> {
    let mapping = params_to_heun(&traj.params)?;
    let hp_params = mapping.require()?;
    let ps = build_polys(&hp_params)?;
    let d = delta_pm(&ps, hp_params.two_omega)?;
    Ok(theta_phase_constants(&traj.half_period()?, hp_params.ell, d.plus, d.minus))
}

/// Which `Θ`-map to apply on the phase side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaAB {
    A,
    B,
}

/// `(U, V)` as used by the map (swapped for `Θ_B`).
fn map_pair(which: ThetaAB, k: &ThetaPhaseConstants) -> Result<(C, C)> {
    let (u, v) = match which {
        ThetaAB::A => (k.big_u, k.big_v),
        ThetaAB::B => (k.big_v, k.big_u),
    };
    if u.norm() + v.norm() == 0.0 {
        return Err(Error::DegenerateConstants);
    }
    Ok((u, v))
}

/// `(Φ', 𝓔')` of the mapped solution at one time, from `(φ, P)` at `t` and `−t`.
pub fn theta_ab_at(
    which: ThetaAB,
    k: &ThetaPhaseConstants,
    phi0: f64,
    state: (f64, f64),
    mirror: (f64, f64),
) -> Result<(C, C)> {
    let (u, v) = map_pair(which, k)?;
    let norm = u * u + v * v - 2.0 * u * v * phi0.sin();
    if norm.norm() < POLE_TOL * (u.norm_sqr() + v.norm_sqr()) {
        return Err(Error::DegenerateConstants);
    }
    let (f, p) = state;
    let (fn_, pn) = mirror;
    let num = v * C::from_polar((p / 2.0).exp(), f / 2.0) - I * u * C::from_polar((pn / 2.0).exp(), -fn_ / 2.0);
    let den = v * C::from_polar((p / 2.0).exp(), -f / 2.0) + I * u * C::from_polar((pn / 2.0).exp(), fn_ / 2.0);
    if den.norm() < POLE_TOL * (u.norm() + v.norm()) {
        return Err(Error::PoleHit);
    }
    Ok((num / den, num * den / norm))
}

/// Applies the `Θ_A` or `Θ_B` phase map to a trajectory over `[−T/2, T/2]`.
pub fn theta_ab_phase(which: ThetaAB, traj: &PhaseTrajectory, k: &ThetaPhaseConstants) -> Result<PhaseTrajectory> {
    traj.require_period()?;
    traj.params.require_ell()?;
    let hp = traj.half_period()?;
    let n = traj.len();
    let mid = n / 2;
    let mut e_iphi = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for j in 0..n {
        let m = n - 1 - j;
        let (phi, ep) = theta_ab_at(which, k, hp.phi0, (traj.phi[j], traj.p[j]), (traj.phi[m], traj.p[m]))?;
        e_iphi.push(phi);
        p.push(ep.norm().ln());
    }
    let start = e_iphi[mid].arg();
    let mut phi = vec![0.0; n];
    let up = unwrap_sequence(start, (mid..n).map(|j| e_iphi[j]))?;
    let down = unwrap_sequence(start, (0..=mid).rev().map(|j| e_iphi[j]))?;
    for (i, j) in (mid..n).enumerate() {
        phi[j] = up[i];
    }
    for (i, j) in (0..=mid).rev().enumerate() {
        phi[j] = down[i];
    }
    Ok(PhaseTrajectory { params: traj.params, t_grid: traj.t_grid.clone(), phi0: phi[mid], phi, p, tol: traj.tol })
}

/// Applies a map and recomputes constants from its output, `count` times.
pub fn theta_ab_iterate(which: ThetaAB, traj: &PhaseTrajectory, count: usize) -> Result<PhaseTrajectory> {
    let mut cur = traj.clone();
    for _ in 0..count {
        let k = trajectory_constants(&cur)?;
        cur = theta_ab_phase(which, &cur, &k)?;
    }
    Ok(cur)
}
