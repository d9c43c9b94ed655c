//! The polynomials `p, q, r, s`, the invariant `Δ` and its factors `Δ±`.
//!
//! Everything here is generic over [`Scalar`], so the same recurrences and
//! identities run in exact Gaussian-rational arithmetic (where every identity
//! residual must be literally zero) and in double precision.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent_poly::Laurent;
use crate::scalar::{sign_pow, Exact, Scalar};

/// Default cap on the integer order parameter.
pub const MAX_ELL: u32 = 64;

/// Parameters of the equation `z²E'' + ((l+1)z + μ(1−z²))E' + (−μ(l+1)z + λ)E = 0`
/// with `l = −ell`, plus the scale `2ω` of the symmetry operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeunParams {
    pub ell: u32,
    pub lambda: Complex64,
    pub mu: Complex64,
    pub two_omega: Complex64,
}

impl HeunParams {
    /// Validates the parameters and fixes `2ω = (λ+μ²)^{-1/2}` (principal root).
    pub fn new(ell: u32, lambda: Complex64, mu: Complex64) -> Result<Self> {
        Self::with_cap(ell, lambda, mu, MAX_ELL)
    }

    /// Same as [`HeunParams::new`] with an explicit cap on `ell`.
    pub fn with_cap(ell: u32, lambda: Complex64, mu: Complex64, cap: u32) -> Result<Self> {
        if ell == 0 || ell > cap {
            return Err(Error::InvalidParams(format!("ell must lie in 1..={cap}, got {ell}")));
        }
        if !(lambda.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParams("non-finite lambda or mu".into()));
        }
        if mu.norm() == 0.0 {
            return Err(Error::DegenerateParams("mu = 0".into()));
        }
        let sum = lambda + mu * mu;
        if sum.norm() <= 1e-14 * (lambda.norm() + mu.norm_sqr()).max(1.0) {
            return Err(Error::DegenerateParams("lambda + mu^2 = 0".into()));
        }
        Ok(HeunParams { ell, lambda, mu, two_omega: 1.0 / sum.sqrt() })
    }

    /// Replaces the operator scale `2ω` (breaking the unit normalization).
    pub fn with_two_omega(mut self, two_omega: Complex64) -> Self {
        self.two_omega = two_omega;
        self
    }

    /// The order `l = −ell`.
    pub fn order(&self) -> i32 {
        -(self.ell as i32)
    }

    /// `(−1)^ell`.
    pub fn parity(&self) -> f64 {
        if self.ell % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `λ + μ²`.
    pub fn sum(&self) -> Complex64 {
        self.lambda + self.mu * self.mu
    }

    /// Principal `(λ + μ²)^{1/2}`.
    pub fn sqrt_sum(&self) -> Complex64 {
        self.sum().sqrt()
    }

    /// `(2ω)²(λ+μ²)`, equal to one under the default normalization.
    pub fn normalization(&self) -> Complex64 {
        self.two_omega * self.two_omega * self.sum()
    }
}

/// The four polynomials for fixed `(ell, λ, μ)` together with `Δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySet<S: Scalar = Complex64> {
    pub ell: u32,
    pub lambda: S,
    pub mu: S,
    pub p: Laurent<S>,
    pub q: Laurent<S>,
    pub r: Laurent<S>,
    pub s: Laurent<S>,
    pub delta: S,
}

/// Runs the recurrences from the seeds `(0, 1, z^{-2}, −μ)` up to index `ell`.
pub fn build_polys_in<S: Scalar>(ell: u32, lambda: S, mu: S) -> Result<PolySet<S>> {
    if ell == 0 {
        return Err(Error::InvalidParams("ell must be positive".into()));
    }
    let sum = lambda.clone() + mu.clone() * mu.clone();
    if sum.is_zero() {
        return Err(Error::DegenerateParams("lambda + mu^2 = 0".into()));
    }
    let l = ell as i64;
    let z = Laurent::monomial(S::one(), 1);
    let z2 = Laurent::monomial(S::one(), 2);
    let c = |a: S| Laurent::constant(a);

    let mut p = Laurent::zero();
    let mut q = c(S::one());
    let mut r = Laurent::monomial(S::one(), -2);
    let mut s = c(-mu.clone());

    // z²(−λ + (ell+1)μz) and z²(λ − (ell+1)μz)
    let lam_term = &z2 * &(&c(-lambda.clone()) + &z.scale(&(S::from_i64(l + 1) * mu.clone())));
    let mu_1mz2 = (&c(S::one()) - &z2).scale(&mu);

    for k in 1..=l {
        let p_new = &(&z.scale(&S::from_i64(1 - l)) * &p) + &(&q + &(&z2 * &p.derivative()));
        let q_new = &(&lam_term * &p) + &(&(&mu_1mz2 * &q) + &(&z2 * &q.derivative()));
        let r_new = &(&(&z.scale(&S::from_i64(2 * (k - 2))) * &r) - &s) - &(&z2 * &r.derivative());
        let s_coef = &z.scale(&S::from_i64(2 * (k - 1) - (l + 1))) + &(&z2 - &c(S::one())).scale(&mu);
        let s_new = &(&(-&lam_term) * &r) + &(&(&s_coef * &s) - &(&z2 * &s.derivative()));
        p = p_new;
        q = q_new;
        r = r_new;
        s = s_new;
    }
    if !(p.is_polynomial() && q.is_polynomial() && r.is_polynomial() && s.is_polynomial()) {
        return Err(Error::DegenerateParams("recurrence left negative powers".into()));
    }
    let one = S::one();
    let p1 = p.eval(&one);
    let r1 = r.eval(&one);
    let delta = sum * p1.clone() * p1 - r1.clone() * r1;
    if delta.is_zero() {
        return Err(Error::DegenerateParams("delta = 0".into()));
    }
    Ok(PolySet { ell, lambda, mu, p, q, r, s, delta })
}

/// Double-precision polynomials for validated parameters.
pub fn build_polys(params: &HeunParams) -> Result<PolySet<Complex64>> {
    let ps = build_polys_in(params.ell, params.lambda, params.mu)?;
    let scale = params.sum().norm() * ps.p.eval_c64(1.0.into()).norm_sqr() + ps.r.eval_c64(1.0.into()).norm_sqr();
    if ps.delta.norm() <= 1e-13 * scale {
        return Err(Error::DegenerateParams("delta = 0".into()));
    }
    delta_pm(&ps, params.two_omega)?;
    Ok(ps)
}

/// Exact polynomials over the Gaussian rationals.
pub fn build_polys_exact(ell: u32, lambda: Exact, mu: Exact) -> Result<PolySet<Exact>> {
    if mu.is_zero_value() {
        return Err(Error::DegenerateParams("mu = 0".into()));
    }
    build_polys_in(ell, lambda, mu)
}

trait ZeroValue {
    fn is_zero_value(&self) -> bool;
}

impl ZeroValue for Exact {
    fn is_zero_value(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

impl<S: Scalar> PolySet<S> {
    /// `λ + μ²`.
    pub fn sum(&self) -> S {
        self.lambda.clone() + self.mu.clone() * self.mu.clone()
    }

    /// `(−1)^ell`.
    pub fn parity(&self) -> S {
        sign_pow(self.ell as i64)
    }

    /// Double-precision copy.
    pub fn to_c64(&self) -> PolySet<Complex64> {
        PolySet {
            ell: self.ell,
            lambda: self.lambda.to_c64(),
            mu: self.mu.to_c64(),
            p: self.p.to_c64(),
            q: self.q.to_c64(),
            r: self.r.to_c64(),
            s: self.s.to_c64(),
            delta: self.delta.to_c64(),
        }
    }

    /// `z^{2(1−ell)}(ps − qr)` as a Laurent polynomial (constant when correct).
    pub fn delta_form(&self) -> Laurent<S> {
        let l = self.ell as i32;
        (&(&self.p * &self.s) - &(&self.q * &self.r)).shift(2 * (1 - l))
    }
}

/// One named identity with its residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Largest coefficient magnitude of `lhs − rhs`, relative in float mode.
    pub residual: f64,
    /// Exact arithmetic and the difference is literally zero.
    pub exact_zero: bool,
}

/// Residuals of all polynomial identities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub exact: bool,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    /// All residuals vanish: exactly in exact mode, below `tol` otherwise.
    pub fn passes(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| if self.exact { c.exact_zero } else { c.residual <= tol })
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

/// Checks the first-order system, the argument-transform identities, the
/// values at `z = 1`, the degree formulas and the constancy of `Δ`.
pub fn verify_poly_system<S: Scalar>(ps: &PolySet<S>, exact: bool) -> IdentityReport {
    let l = ps.ell as i64;
    let li = ps.ell as i32;
    let (p, q, r, s) = (&ps.p, &ps.q, &ps.r, &ps.s);
    let mu = ps.mu.clone();
    let lam = ps.lambda.clone();
    let sum = ps.sum();
    let inv_sum = S::one() / sum.clone();
    let sg: S = sign_pow(l);
    let sg1: S = sign_pow(l + 1);
    let c = |a: S| Laurent::constant(a);
    let z = Laurent::monomial(S::one(), 1);
    let z2 = Laurent::monomial(S::one(), 2);
    let zk = |k: i32| Laurent::monomial(S::one(), k);

    let scale =
        [p.max_abs(), q.max_abs(), r.max_abs(), s.max_abs(), sum.magnitude(), 1.0].into_iter().fold(0.0, f64::max);
    let mut checks = Vec::new();
    let mut push = |name: &str, diff: Laurent<S>| {
        let raw = diff.max_abs();
        checks.push(IdentityCheck {
            name: name.to_string(),
            residual: if exact { raw } else { raw / scale },
            exact_zero: exact && diff.is_zero(),
        });
    };

    let mu_z2p_q = &z2.scale(&mu) * p + q.clone();
    let mu_z2r_s = &z2.scale(&mu) * r + s.clone();
    let lam_lz = &c(lam.clone()) - &z.scale(&(S::from_i64(l + 1) * mu.clone()));

    // first-order system
    let rhs = &(&(&c(mu.clone()) + &z.scale(&S::from_i64(l - 1))) * p) - q;
    let rhs = &rhs + &(&z2 * r).scale(&sg);
    push("system.p", &(&z2 * &p.derivative()) - &rhs);
    let rhs = &(&(&lam_lz * p) + &q.scale(&mu)) + &s.scale(&sg);
    push("system.q", &q.derivative() - &rhs);
    let rhs = &p.scale(&(sg1.clone() * sum.clone())) + &(&(&z * &(&c(S::from_i64(2 * (l - 1))) - &z.scale(&mu))) * r);
    push("system.r", &(&z2 * &r.derivative()) - &(&rhs - s));
    let rhs = &(&q.scale(&(sg1.clone() * sum.clone())) + &(&(&z2 * &lam_lz) * r))
        + &(&(&z.scale(&S::from_i64(l - 1)) - &c(mu.clone())) * s);
    push("system.s", &(&z2 * &s.derivative()) - &rhs);

    // z -> −1/z
    let neg_inv = |f: &Laurent<S>| f.reflect().invert();
    push("neg_inv.p", &neg_inv(p) - &(&zk(-2 * (li - 1)) * p).scale(&sg1));
    push("neg_inv.q", &neg_inv(q) - &(&zk(-2 * li) * &(&p.scale(&(sg.clone() * mu.clone())) + &(&z2 * r))));
    push("neg_inv.r", &neg_inv(r) - &(&zk(-2 * (li - 1)) * &mu_z2p_q));
    let inner = &mu_z2p_q.scale(&mu) + &(&z2 * &mu_z2r_s).scale(&sg);
    push("neg_inv.s", &neg_inv(s) + &(&zk(-2 * li) * &inner));

    // z -> −z
    push("neg.p", &p.reflect() - &mu_z2r_s.scale(&(sg1.clone() * inv_sum.clone())));
    let rhs = &mu_z2p_q + &(&z2 * &mu_z2r_s).scale(&(sg.clone() * inv_sum.clone() * mu.clone()));
    push("neg.q", &q.reflect() - &rhs);
    push("neg.r", &r.reflect() - r);
    let rhs = &p.scale(&(sg1 * sum.clone())) - &(&z2 * r).scale(&mu);
    push("neg.s", &s.reflect() - &rhs);

    // z -> 1/z
    push("inv.p", &p.invert() - &(&zk(-2 * (li - 1)) * &mu_z2r_s).scale(&inv_sum));
    let inner = &(&z2 * r).scale(&lam) - &s.scale(&mu);
    push("inv.q", &q.invert() - &(&zk(-2 * li) * &inner).scale(&inv_sum));
    push("inv.r", &r.invert() - &(&zk(-2 * (li - 1)) * &mu_z2p_q));
    let inner = &(&z2 * p).scale(&lam) - &q.scale(&mu);
    push("inv.s", &s.invert() - &(&zk(-2 * li) * &inner));

    // values at z = 1
    let one = S::one();
    let (p1, q1, r1, s1) = (p.eval(&one), q.eval(&one), r.eval(&one), s.eval(&one));
    push("unit.q", c(q1 - (r1.clone() - mu.clone() * p1.clone())));
    push("unit.s", c(s1 - (sum.clone() * p1.clone() - mu * r1.clone())));

    // Δ is constant and equals (λ+μ²)p(1)² − r(1)²
    push("delta.constant", &ps.delta_form() - &c(ps.delta.clone()));
    push("delta.unit", c(ps.delta.clone() - (sum * p1.clone() * p1 - r1.clone() * r1)));

    // degrees
    let degree_gap = |f: &Laurent<S>, want: i32| -> Laurent<S> {
        if f.degree() == Some(want) && f.is_polynomial() {
            Laurent::zero()
        } else {
            c(S::one())
        }
    };
    push("degree.p", degree_gap(p, 2 * (li - 1)));
    push("degree.q", degree_gap(q, 2 * li));
    push("degree.r", degree_gap(r, 2 * (li - 1)));
    push("degree.s", degree_gap(s, 2 * li));

    IdentityReport { exact, checks }
}

/// Largest `|z^{2(1−ell)}(ps − qr)(z) − Δ|` over the sample points.
pub fn delta_constancy_check<S: Scalar>(ps: &PolySet<S>, points: &[S]) -> f64 {
    let form = ps.delta_form();
    points.iter().map(|z| (form.eval(z) - ps.delta.clone()).magnitude()).fold(0.0, f64::max)
}

/// `Δ±` and the two candidate relations for their product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaPm {
    pub plus: Complex64,
    pub minus: Complex64,
    pub product: Complex64,
    /// `Δ₊Δ₋ / Δ`.
    pub ratio_to_delta: Complex64,
    /// `|Δ₊Δ₋ − (2ω)^{+2}Δ| / |Δ₊Δ₋|`.
    pub dev_plus_two: f64,
    /// `|Δ₊Δ₋ − (2ω)^{−2}Δ| / |Δ₊Δ₋|`.
    pub dev_minus_two: f64,
}

impl DeltaPm {
    /// Exponent `k` for which `Δ₊Δ₋ = (2ω)^k Δ` holds within `tol`, if unique.
    pub fn confirmed_exponent(&self, tol: f64) -> Option<i32> {
        match (self.dev_plus_two <= tol, self.dev_minus_two <= tol) {
            (true, false) => Some(2),
            (false, true) => Some(-2),
            _ => None,
        }
    }
}

/// `Δ± = p(1) ± (−1)^ell 2ω r(1)`.
pub fn delta_pm<S: Scalar>(ps: &PolySet<S>, two_omega: Complex64) -> Result<DeltaPm> {
    let one = Complex64::new(1.0, 0.0);
    let p1 = ps.p.to_c64().eval_c64(one);
    let r1 = ps.r.to_c64().eval_c64(one);
    let sg = if ps.ell % 2 == 0 { 1.0 } else { -1.0 };
    let t = sg * two_omega * r1;
    let (plus, minus) = (p1 + t, p1 - t);
    let scale = p1.norm() + t.norm();
    if plus.norm() <= 1e-13 * scale || minus.norm() <= 1e-13 * scale {
        return Err(Error::DegenerateParams("delta_plus or delta_minus vanishes".into()));
    }
    let delta = ps.delta.to_c64();
    let product = plus * minus;
    let tw2 = two_omega * two_omega;
    Ok(DeltaPm {
        plus,
        minus,
        product,
        ratio_to_delta: product / delta,
        dev_plus_two: (product - tw2 * delta).norm() / product.norm(),
        dev_minus_two: (product - delta / tw2).norm() / product.norm(),
    })
}

/// JSON layout of a polynomial set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolySetExport {
    pub ell: u32,
    pub lambda: [f64; 2],
    pub mu: [f64; 2],
    pub p: Vec<[f64; 2]>,
    pub q: Vec<[f64; 2]>,
    pub r: Vec<[f64; 2]>,
    pub s: Vec<[f64; 2]>,
    pub delta: [f64; 2],
    pub delta_plus: [f64; 2],
    pub delta_minus: [f64; 2],
}

pub(crate) fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl PolySetExport {
    pub fn new<S: Scalar>(ps: &PolySet<S>, dpm: &DeltaPm) -> Self {
        let coeffs = |f: &Laurent<S>| f.poly_coeffs().iter().map(|x| pair(x.to_c64())).collect();
        PolySetExport {
            ell: ps.ell,
            lambda: pair(ps.lambda.to_c64()),
            mu: pair(ps.mu.to_c64()),
            p: coeffs(&ps.p),
            q: coeffs(&ps.q),
            r: coeffs(&ps.r),
            s: coeffs(&ps.s),
            delta: pair(ps.delta.to_c64()),
            delta_plus: pair(dpm.plus),
            delta_minus: pair(dpm.minus),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> Exact {
        Complex::new(BigRational::new(n.into(), d.into()), BigRational::new(0.into(), 1.into()))
    }

    #[test]
    fn ell_one_closed_forms() {
        let (lam, mu) = (q(1, 1), q(1, 2));
        let ps = build_polys_exact(1, lam.clone(), mu.clone()).unwrap();
        let sum = lam.clone() + mu.clone() * mu.clone();
        assert_eq!(ps.p, Laurent::constant(q(1, 1)));
        assert_eq!(ps.q, Laurent::from_coeffs(vec![mu.clone(), q(0, 1), -mu.clone()]));
        assert_eq!(ps.r, Laurent::constant(mu.clone()));
        assert_eq!(ps.s, Laurent::from_coeffs(vec![sum, q(0, 1), -(mu.clone() * mu)]));
        assert_eq!(ps.delta, lam);
    }

    #[test]
    fn ell_one_identities_vanish() {
        let ps = build_polys_exact(1, q(1, 1), q(1, 2)).unwrap();
        let rep = verify_poly_system(&ps, true);
        for c in &rep.checks {
            assert!(c.exact_zero, "{} = {}", c.name, c.residual);
        }
        assert_eq!(delta_constancy_check(&ps, &[q(1, 1), q(2, 1), Complex::new(q(0, 1).re, q(1, 1).re)]), 0.0);
    }

    #[test]
    fn r_even() {
        for ell in 1..=3 {
            let ps = build_polys_exact(ell, q(3, 7), q(-2, 5)).unwrap();
            assert_eq!(ps.r.reflect(), ps.r);
        }
    }

    #[test]
    fn seeds_at_index_zero_are_not_polynomials() {
        // ell = 1 runs a single step; the z^{-2} seed must cancel
        let ps = build_polys_in(1, Complex64::new(0.3, 0.1), Complex64::new(0.7, 0.0)).unwrap();
        assert!(ps.r.is_polynomial());
    }

    #[test]
    fn delta_factors_ell_one() {
        let params = HeunParams::new(1, 1.0.into(), 0.5.into()).unwrap();
        let ps = build_polys(&params).unwrap();
        let d = delta_pm(&ps, params.two_omega).unwrap();
        let tw = params.two_omega;
        assert!((d.plus - (1.0 - tw * 0.5)).norm() < 1e-15);
        assert!((d.minus - (1.0 + tw * 0.5)).norm() < 1e-15);
        assert!((d.product - 0.8).norm() < 1e-14);
        assert!((d.ratio_to_delta - 0.8).norm() < 1e-14);
        assert_eq!(d.confirmed_exponent(1e-12), Some(2));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(HeunParams::new(1, Complex64::new(-0.25, 0.0), 0.5.into()), Err(Error::DegenerateParams(_))));
        assert!(matches!(HeunParams::new(0, 1.0.into(), 0.5.into()), Err(Error::InvalidParams(_))));
        // ell = 1: Δ = λ
        assert!(matches!(build_polys_exact(1, q(0, 1), q(1, 2)), Err(Error::DegenerateParams(_))));
    }
}
