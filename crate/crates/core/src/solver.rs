//! Continuation of solutions along the cover, the Θ_C-eigenbasis `E±`, and
//! the symmetry operators Θ_A, Θ_B, Θ_C acting on arbitrary cover functions.
//!
//! Solutions are integrated in `w = ln ρ + iφ`, where the cover is the whole
//! plane and continuation along any path gives the same result. Local
//! behaviour (derivatives, Θ-images) is described by truncated Taylor series
//! in the projected variable `z` built from the differentiated equation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cover::{CoverPoint, LiftMap};
use crate::error::{Error, Result};
use crate::laurent_poly::Laurent;
use crate::ode::{integrate, Options};
use crate::polys::{build_polys, delta_pm, DeltaPm, HeunParams, PolySet};
use crate::series::Series;

type C = Complex64;

/// Default integration tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Value and `z`-derivative of a solution at a cover point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFrame {
    pub point: CoverPoint,
    pub value: C,
    pub deriv: C,
}

impl SolutionFrame {
    pub fn new(point: CoverPoint, value: C, deriv: C) -> Self {
        SolutionFrame { point, value, deriv }
    }
}

/// Coefficients `(a, b, c)` of `a E'' + b E' + c E = 0` at `z`.
pub fn coefficients(params: &HeunParams, z: C) -> (C, C, C) {
    let l1 = params.order() as f64 + 1.0;
    let mu = params.mu;
    (z * z, z * l1 + mu * (1.0 - z * z), -mu * l1 * z + params.lambda)
}

/// `|aE'' + bE' + cE|` for a jet, together with the sum of term magnitudes.
pub fn equation_residual(params: &HeunParams, z: C, jet: &Series) -> (C, f64) {
    let (a, b, c) = coefficients(params, z);
    let t = [a * jet.derivative_at(2), b * jet.derivative_at(1), c * jet.value()];
    (t[0] + t[1] + t[2], t.iter().map(|x| x.norm()).sum())
}

/// Residual scaled by `max(1, Σ|terms|)`.
pub fn scaled_equation_residual(params: &HeunParams, z: C, jet: &Series) -> f64 {
    let (r, scale) = equation_residual(params, z, jet);
    r.norm() / scale.max(1.0)
}

/// `|a − b| / max(1, |a|, |b|)`.
pub fn scaled_diff(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Taylor coefficients of the solution through `frame` in `h = z − z0`.
pub fn taylor_jet(params: &HeunParams, frame: &SolutionFrame, order: usize) -> Series {
    let z0 = frame.point.project();
    let l1 = params.order() as f64 + 1.0;
    let mu = params.mu;
    let a = [z0 * z0, 2.0 * z0, C::new(1.0, 0.0)];
    let b = [z0 * l1 + mu * (1.0 - z0 * z0), C::new(l1, 0.0) - 2.0 * mu * z0, -mu];
    let c = [-mu * l1 * z0 + params.lambda, -mu * l1];
    let mut e = vec![C::new(0.0, 0.0); order.max(1) + 1];
    e[0] = frame.value;
    e[1] = frame.deriv;
    for n in 0..order.saturating_sub(1) {
        let mut acc = C::new(0.0, 0.0);
        for j in 1..=2 {
            if n + 2 >= j {
                let m = n + 2 - j;
                acc += a[j] * (m as f64 * (m as f64 - 1.0)) * e[m];
            }
        }
        for (j, bj) in b.iter().enumerate() {
            if n + 1 >= j {
                let m = n + 1 - j;
                acc += bj * m as f64 * e[m];
            }
        }
        for (j, cj) in c.iter().enumerate() {
            if n >= j {
                acc += cj * e[n - j];
            }
        }
        e[n + 2] = -acc / (a[0] * ((n + 2) * (n + 1)) as f64);
    }
    Series::from_coeffs(e).truncate(order)
}

/// Continues `N/2` solutions, stored as consecutive `(E, E')` pairs, along
/// the straight segment from `from` to `to` in the logarithmic coordinate.
pub fn integrate_pairs<const N: usize>(
    params: &HeunParams,
    from: CoverPoint,
    y0: [C; N],
    to: CoverPoint,
    tol: f64,
) -> Result<[C; N]> {
    let w0 = from.log();
    let dw = to.log() - w0;
    if dw.norm() == 0.0 {
        return Ok(y0);
    }
    let l1 = params.order() as f64 + 1.0;
    let (mu, lam) = (params.mu, params.lambda);
    let f = |s: f64, y: &[C; N]| {
        let z = (w0 + dw * s).exp();
        let b = z * l1 + mu * (1.0 - z * z);
        let c = -mu * l1 * z + lam;
        let mut out = [C::new(0.0, 0.0); N];
        for j in 0..N / 2 {
            let (e, d) = (y[2 * j], y[2 * j + 1]);
            out[2 * j] = dw * z * d;
            out[2 * j + 1] = -dw * (b * d + c * e) / z;
        }
        out
    };
    integrate(f, 0.0, y0, 1.0, Options::with_tol(tol)).map_err(|u| {
        let w = w0 + dw * u.t;
        Error::StepFailure { re: w.re, im: w.im }
    })
}

/// Analytic continuation of a single solution.
pub fn integrate_path(
    params: &HeunParams,
    start: SolutionFrame,
    target: CoverPoint,
    tol: f64,
) -> Result<SolutionFrame> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParams("tolerance must be positive".into()));
    }
    let y = integrate_pairs(params, start.point, [start.value, start.deriv], target, tol)?;
    Ok(SolutionFrame { point: target, value: y[0], deriv: y[1] })
}

/// A function on the cover described locally by Taylor series in `z`.
pub trait CoverFunction: Sync {
    /// Taylor coefficients at `at` in `h = z − project(at)`, up to `order`.
    fn jet(&self, at: CoverPoint, order: usize) -> Result<Series>;

    fn value(&self, at: CoverPoint) -> Result<C> {
        Ok(self.jet(at, 0)?.value())
    }
}

impl<F: CoverFunction + ?Sized> CoverFunction for &F {
    fn jet(&self, at: CoverPoint, order: usize) -> Result<Series> {
        (**self).jet(at, order)
    }
}

impl<F: CoverFunction + ?Sized> CoverFunction for Box<F> {
    fn jet(&self, at: CoverPoint, order: usize) -> Result<Series> {
        (**self).jet(at, order)
    }
}

/// `ẑ ↦ f(M^k ẑ)`.
pub struct Shifted<F> {
    pub k: i64,
    pub inner: F,
}

impl<F: CoverFunction> CoverFunction for Shifted<F> {
    fn jet(&self, at: CoverPoint, order: usize) -> Result<Series> {
        self.inner.jet(at.shifted(self.k), order)
    }
}

/// Linear combination `Σ c_i f_i`.
pub struct Combination<'a> {
    pub terms: Vec<(C, &'a dyn CoverFunction)>,
}

impl CoverFunction for Combination<'_> {
    fn jet(&self, at: CoverPoint, order: usize) -> Result<Series> {
        let mut acc = Series::constant(C::new(0.0, 0.0), order);
        for (c, f) in &self.terms {
            acc = &acc + &f.jet(at, order)?.scale(*c);
        }
        Ok(acc)
    }
}

/// A function of the projected variable, given on series.
pub struct ZFunction<G: Fn(&Series) -> Series + Sync>(pub G);

impl<G: Fn(&Series) -> Series + Sync> CoverFunction for ZFunction<G> {
    fn jet(&self, at: CoverPoint, order: usize) -> Result<Series> {
        Ok((self.0)(&Series::variable(at.project(), order)))
    }
}

/// Which symmetry operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theta {
    A,
    B,
    C,
}

impl Theta {
    pub fn lift(self) -> LiftMap {
        match self {
            Theta::A => LiftMap::A,
            Theta::B => LiftMap::B,
            Theta::C => LiftMap::C,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Theta::A => "A",
            Theta::B => "B",
            Theta::C => "C",
        }
    }
}

/// Parameters and polynomials needed to apply the Θ-operators.
#[derive(Clone, Debug)]
pub struct Operators {
    pub params: HeunParams,
    pub polys: PolySet<C>,
    /// `q + μz²p`.
    qmp: Laurent<C>,
}

impl Operators {
    pub fn new(params: HeunParams) -> Result<Self> {
        let polys = build_polys(&params)?;
        Ok(Self::from_polys(params, polys))
    }

    pub fn from_polys(params: HeunParams, polys: PolySet<C>) -> Self {
        let qmp = &polys.q + &(&Laurent::monomial(params.mu, 2) * &polys.p);
        Operators { params, polys, qmp }
    }

    /// The image `Θ[f]` as a cover function.
    pub fn image<'a, F: CoverFunction + ?Sized>(&'a self, which: Theta, inner: &'a F) -> ThetaImage<'a, F> {
        ThetaImage { which, inner, ops: self }
    }

    /// `(2ω)²(λ+μ²)`.
    pub fn normalization(&self) -> C {
        self.params.normalization()
    }

    /// Jet of `Θ[f]` given the jet of `f` at the mapped point.
    fn apply_jet(&self, which: Theta, z0: C, inner: &Series, order: usize) -> Series {
        let p = &self.params;
        let z = Series::variable(z0, order + 1);
        let u = match which {
            Theta::A => -&z.recip(),
            Theta::B => -&z,
            Theta::C => z.recip(),
        };
        let e = Series::compose(inner, &u);
        let de = Series::compose(&inner.derivative(), &u);
        let core = &de - &e.scale(p.mu);
        let poly = |f: &Laurent<C>| Series::laurent(f, &z);
        let zz = &z + &z.recip();
        let out = match which {
            Theta::A => {
                let bracket = &(&poly(&self.polys.p) * &core) + &(&poly(&self.qmp) * &e);
                &zz.scale(p.mu).exp() * &bracket.scale(C::new(p.parity(), 0.0))
            }
            Theta::B => {
                let bracket = &(&poly(&self.qmp) * &core) + &(&poly(&self.polys.p) * &e).scale(p.sum());
                let pre = &zz.scale(p.mu).exp() * &z.powi(1 - p.ell as i32);
                (&pre * &bracket).scale(p.two_omega)
            }
            Theta::C => (&z.powi(p.ell as i32 - 1) * &core).scale(p.two_omega),
        };
        out.truncate(order)
    }
}

/// `Θ[f]` for a cover function `f`.
pub struct ThetaImage<'a, F: CoverFunction + ?Sized> {
    pub which: Theta,
    pub inner: &'a F,
    pub ops: &'a Operators,
}

impl<F: CoverFunction + ?Sized> CoverFunction for ThetaImage<'_, F> {
    fn jet(&self, at: CoverPoint, order: usize) -> Result<Series> {
        let mapped = self.which.lift().apply(at);
        let inner = self.inner.jet(mapped, order + 1)?;
        Ok(self.ops.apply_jet(self.which, at.project(), &inner, order))
    }
}

#[derive(Clone, Copy, Debug)]
struct CacheEntry {
    y: [C; 4],
    anchor: bool,
}

/// The Θ_C-eigenfunctions `E±` with `E±(1̂) = 1`, `E±'(1̂) = μ ± (λ+μ²)^{1/2}`.
pub struct EigenBasis {
    ops: Operators,
    tol: f64,
    cauchy: [SolutionFrame; 2],
    cache: RwLock<HashMap<(u64, u64), CacheEntry>>,
}

/// Distance in `w` below which a cached frame seeds a new integration.
const REUSE_RADIUS: f64 = 0.5;

/// Builds the eigenbasis for generic parameters.
pub fn eigenbasis(params: &HeunParams, tol: f64) -> Result<EigenBasis> {
    EigenBasis::new(*params, tol)
}

impl EigenBasis {
    pub fn new(params: HeunParams, tol: f64) -> Result<Self> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidParams("tolerance must be positive".into()));
        }
        let ops = Operators::new(params)?;
        let root = params.sqrt_sum();
        let one = C::new(1.0, 0.0);
        let cauchy = [
            SolutionFrame::new(CoverPoint::ONE, one, params.mu + root),
            SolutionFrame::new(CoverPoint::ONE, one, params.mu - root),
        ];
        Ok(EigenBasis { ops, tol, cauchy, cache: RwLock::new(HashMap::new()) })
    }

    pub fn params(&self) -> &HeunParams {
        &self.ops.params
    }

    pub fn polys(&self) -> &PolySet<C> {
        &self.ops.polys
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn delta(&self) -> C {
        self.ops.polys.delta
    }

    pub fn delta_pm(&self) -> Result<DeltaPm> {
        delta_pm(&self.ops.polys, self.ops.params.two_omega)
    }

    /// Cauchy data of `E₊` and `E₋` at the lifted unit.
    pub fn cauchy(&self) -> [SolutionFrame; 2] {
        self.cauchy
    }

    /// Number of cached frames.
    pub fn cache_len(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    fn key(p: CoverPoint) -> (u64, u64) {
        (p.rho.to_bits(), p.phi.to_bits())
    }

    fn raw(&self, at: CoverPoint) -> Result<[C; 4]> {
        if at == CoverPoint::ONE {
            let [p, m] = self.cauchy;
            return Ok([p.value, p.deriv, m.value, m.deriv]);
        }
        let w = at.log();
        let mut seed = (CoverPoint::ONE, None::<[C; 4]>, w.norm());
        if let Ok(cache) = self.cache.read() {
            if let Some(e) = cache.get(&Self::key(at)) {
                return Ok(e.y);
            }
            for (k, e) in cache.iter().filter(|(_, e)| e.anchor) {
                let p = CoverPoint { rho: f64::from_bits(k.0), phi: f64::from_bits(k.1) };
                let d = (p.log() - w).norm();
                if d < seed.2 {
                    seed = (p, Some(e.y), d);
                }
            }
        }
        let (start, y0, anchor) = match seed {
            (p, Some(y), d) if d < REUSE_RADIUS => (p, y, false),
            _ => {
                let [p, m] = self.cauchy;
                (CoverPoint::ONE, [p.value, p.deriv, m.value, m.deriv], true)
            }
        };
        let y = integrate_pairs(&self.ops.params, start, y0, at, self.tol)?;
        if let Ok(mut cache) = self.cache.write() {
            cache.insert(Self::key(at), CacheEntry { y, anchor });
        }
        Ok(y)
    }

    /// Frames of `E₊` and `E₋` at a cover point.
    pub fn frames(&self, at: CoverPoint) -> Result<[SolutionFrame; 2]> {
        let y = self.raw(at)?;
        Ok([SolutionFrame::new(at, y[0], y[1]), SolutionFrame::new(at, y[2], y[3])])
    }

    /// `(E₊(ẑ), E₋(ẑ))`.
    pub fn values(&self, at: CoverPoint) -> Result<[C; 2]> {
        let y = self.raw(at)?;
        Ok([y[0], y[2]])
    }

    /// `(E₊'(ẑ), E₋'(ẑ))`.
    pub fn derivs(&self, at: CoverPoint) -> Result<[C; 2]> {
        let y = self.raw(at)?;
        Ok([y[1], y[3]])
    }

    pub fn jets(&self, at: CoverPoint, order: usize) -> Result<[Series; 2]> {
        let [fp, fm] = self.frames(at)?;
        Ok([taylor_jet(self.params(), &fp, order), taylor_jet(self.params(), &fm, order)])
    }

    pub fn handle(&self, c_plus: C, c_minus: C) -> SolutionHandle<'_> {
        SolutionHandle { basis: self, coeffs: [c_plus, c_minus] }
    }

    pub fn plus(&self) -> SolutionHandle<'_> {
        self.handle(C::new(1.0, 0.0), C::new(0.0, 0.0))
    }

    pub fn minus(&self) -> SolutionHandle<'_> {
        self.handle(C::new(0.0, 0.0), C::new(1.0, 0.0))
    }

    /// Solution through the given Cauchy data at any cover point.
    pub fn solution(&self, frame: &SolutionFrame) -> Result<SolutionHandle<'_>> {
        if frame.value == C::new(0.0, 0.0) && frame.deriv == C::new(0.0, 0.0) {
            return Err(Error::ZeroSolution);
        }
        let [fp, fm] = self.frames(frame.point)?;
        let det = fp.value * fm.deriv - fm.value * fp.deriv;
        let cp = (frame.value * fm.deriv - fm.value * frame.deriv) / det;
        let cm = (fp.value * frame.deriv - frame.value * fp.deriv) / det;
        Ok(self.handle(cp, cm))
    }

    /// Residuals of `E±' − μE± ∓ (2ω)^{-1} z^{ell−1} E±(1/ẑ)` at a point.
    pub fn eigen_residual(&self, at: CoverPoint) -> Result<[f64; 2]> {
        let p = self.params();
        let d = self.derivs(at)?;
        let v = self.values(at)?;
        let vi = self.values(at.inv())?;
        let zpow = at.powi(p.ell as i32 - 1) / p.two_omega;
        Ok([scaled_diff(d[0] - p.mu * v[0], zpow * vi[0]), scaled_diff(d[1] - p.mu * v[1], -zpow * vi[1])])
    }

    /// Sample rows for export.
    pub fn sample(&self, at: CoverPoint) -> Result<BasisSample> {
        let y = self.raw(at)?;
        Ok(BasisSample { point: at, plus: y[0], minus: y[2], dplus: y[1], dminus: y[3] })
    }
}

/// Basis values and derivatives at one point.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BasisSample {
    pub point: CoverPoint,
    pub plus: C,
    pub minus: C,
    pub dplus: C,
    pub dminus: C,
}

impl BasisSample {
    /// CSV column names, matching [`BasisSample::row`].
    pub const HEADER: [&'static str; 10] =
        ["rho", "phi", "re_Ep", "im_Ep", "re_Em", "im_Em", "re_dEp", "im_dEp", "re_dEm", "im_dEm"];

    pub fn row(&self) -> [f64; 10] {
        [
            self.point.rho,
            self.point.phi,
            self.plus.re,
            self.plus.im,
            self.minus.re,
            self.minus.im,
            self.dplus.re,
            self.dplus.im,
            self.dminus.re,
            self.dminus.im,
        ]
    }
}

/// The solution `c₊E₊ + c₋E₋`.
#[derive(Clone, Copy)]
pub struct SolutionHandle<'a> {
    pub basis: &'a EigenBasis,
    pub coeffs: [C; 2],
}

impl SolutionHandle<'_> {
    pub fn frame(&self, at: CoverPoint) -> Result<SolutionFrame> {
        let y = self.basis.raw(at)?;
        let [a, b] = self.coeffs;
        Ok(SolutionFrame::new(at, a * y[0] + b * y[2], a * y[1] + b * y[3]))
    }

    pub fn deriv(&self, at: CoverPoint) -> Result<C> {
        Ok(self.frame(at)?.deriv)
    }
}

impl CoverFunction for SolutionHandle<'_> {
    fn jet(&self, at: CoverPoint, order: usize) -> Result<Series> {
        Ok(taylor_jet(self.basis.params(), &self.frame(at)?, order))
    }

    fn value(&self, at: CoverPoint) -> Result<C> {
        Ok(self.frame(at)?.value)
    }
}

/// Coefficients of a solution given by Cauchy data at `1̂` in the `E±` basis.
pub fn split_eigen(params: &HeunParams, frame: &SolutionFrame) -> Result<(C, C)> {
    if frame.point != CoverPoint::ONE {
        return Err(Error::InvalidParams("Cauchy data must be given at the lifted unit".into()));
    }
    if frame.value == C::new(0.0, 0.0) && frame.deriv == C::new(0.0, 0.0) {
        return Err(Error::ZeroSolution);
    }
    let root = params.sqrt_sum();
    let (mp, mm) = (params.mu + root, params.mu - root);
    let (v, d) = (frame.value, frame.deriv);
    Ok(((d - mm * v) / (mp - mm), (mp * v - d) / (mp - mm)))
}

/// `z^{1−ell} e^{−μ(z+1/z)} (E₁'E₂ − E₂'E₁)` at a point.
pub fn wronskian(s1: &SolutionHandle<'_>, s2: &SolutionHandle<'_>, at: CoverPoint) -> Result<C> {
    let p = s1.basis.params();
    let (f1, f2) = (s1.frame(at)?, s2.frame(at)?);
    let z = at.project();
    let pre = at.powi(1 - p.ell as i32) * (-p.mu * (z + 1.0 / z)).exp();
    Ok(pre * (f1.deriv * f2.value - f2.deriv * f1.value))
}

/// `Θ[s](ẑ)` for a solution handle.
pub fn theta_apply(which: Theta, s: &SolutionHandle<'_>, at: CoverPoint) -> Result<C> {
    s.basis.operators().image(which, s).value(at)
}

/// Scaled residual of the equation for a cover function at a point.
pub fn function_residual(params: &HeunParams, f: &dyn CoverFunction, at: CoverPoint) -> Result<f64> {
    let jet = f.jet(at, 2)?;
    Ok(scaled_equation_residual(params, at.project(), &jet))
}

/// Settings for [`verify_compositions`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionConfig {
    pub solutions: usize,
    pub points: usize,
    pub seed: u64,
    pub shifts: Vec<i64>,
    /// Use `−Δ` in place of `Δ` (negative control).
    pub flip_delta: bool,
}

impl Default for CompositionConfig {
    fn default() -> Self {
        CompositionConfig { solutions: 3, points: 3, seed: 0, shifts: vec![-2, -1, 0, 1, 2], flip_delta: false }
    }
}

/// Largest residual of one rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleResidual {
    pub name: String,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub rules: Vec<RuleResidual>,
}

impl CompositionReport {
    pub fn max_residual(&self) -> f64 {
        self.rules.iter().map(|r| r.max_residual).fold(0.0, f64::max)
    }

    pub fn passes(&self, budget: f64) -> bool {
        self.rules.iter().all(|r| r.max_residual < budget)
    }

    fn record(&mut self, name: &str, r: f64) {
        match self.rules.iter_mut().find(|x| x.name == name) {
            Some(x) => x.max_residual = x.max_residual.max(r),
            None => self.rules.push(RuleResidual { name: name.into(), max_residual: r }),
        }
    }
}

/// Random point with `ρ ∈ [1/2, 2]` (log-uniform) and `φ ∈ [−π, π]`.
pub fn random_point<R: Rng>(rng: &mut R) -> CoverPoint {
    let lr: f64 = rng.gen_range(-std::f64::consts::LN_2..std::f64::consts::LN_2);
    CoverPoint::new(lr.exp(), rng.gen_range(-PI..PI))
}

/// Random complex number in the unit square around the origin.
pub fn random_complex<R: Rng>(rng: &mut R) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Checks the nine composition rules and the three commutation families at
/// function level on random solutions and points.
pub fn verify_compositions(basis: &EigenBasis, cfg: &CompositionConfig) -> Result<CompositionReport> {
    let ops = basis.operators();
    let n = ops.normalization();
    let delta = if cfg.flip_delta { -basis.delta() } else { basis.delta() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = CompositionReport { rules: Vec::new() };
    use Theta::{A, B, C as TC};
    for _ in 0..cfg.solutions {
        let s = basis.handle(random_complex(&mut rng), random_complex(&mut rng));
        for _ in 0..cfg.points {
            let z = random_point(&mut rng);
            let th = |x: Theta, y: Theta| ops.image(x, &ops.image(y, &s)).value(z);
            let one = |x: Theta, at: CoverPoint| ops.image(x, &s).value(at);
            let sv = |at: CoverPoint| s.value(at);
            let m1 = z.shifted(1);
            let mm1 = z.shifted(-1);
            let rules: [(&str, C, C); 9] = [
                ("AA", th(A, A)?, -delta * sv(z)?),
                ("BB", th(B, B)?, n * delta * sv(m1)?),
                ("CC", th(TC, TC)?, n * sv(z)?),
                ("AB", th(A, B)?, delta * one(TC, mm1)?),
                ("BA", th(B, A)?, -delta * one(TC, z)?),
                ("BC", th(B, TC)?, -n * one(A, m1)?),
                ("CB", th(TC, B)?, n * one(A, z)?),
                ("CA", th(TC, A)?, one(B, z)?),
                ("AC", th(A, TC)?, -one(B, mm1)?),
            ];
            for (name, lhs, rhs) in rules {
                report.record(name, scaled_diff(lhs, rhs));
            }
            for &k in &cfg.shifts {
                let shifted = |j: i64| Shifted { k: j, inner: s };
                let lhs_a = one(A, z.shifted(k))?;
                let rhs_a = ops.image(A, &shifted(-k)).value(z)?;
                report.record("M^k A = A M^-k", scaled_diff(lhs_a, rhs_a));
                let lhs_b = one(B, z.shifted(k))?;
                let rhs_b = ops.image(B, &shifted(k)).value(z)?;
                report.record("M^k B = B M^k", scaled_diff(lhs_b, rhs_b));
                let lhs_c = one(TC, z.shifted(k))?;
                let rhs_c = ops.image(TC, &shifted(-k)).value(z)?;
                report.record("M^k C = C M^-k", scaled_diff(lhs_c, rhs_c));
            }
        }
    }
    Ok(report)
}
