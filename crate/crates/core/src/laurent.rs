//! Monodromy eigen-combinations and convergent generalized power series.
//!
//! `E_[±] = √(i(a₋²−b₋²)) E₊ ± √(i(a₊²−b₊²)) E₋` satisfy
//! `E_[±](Mẑ) = Λ± E_[±](ẑ)`, so `z^{γ±} E_[±]` is single-valued with
//! `γ± = i Log(Λ±)/(2π)` and `E_[±] = Σ g_k z^{k−γ±}`. The coefficients are the
//! minimal solution of a three-term recurrence, found as the null vector of a
//! truncated tridiagonal system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cover::CoverPoint;
use crate::error::{Error, Result};
use crate::monodromy::{BoundaryData, Matrix2};
use crate::polys::HeunParams;
use crate::solver::SolutionFrame;

type C = Complex64;

/// Tolerance on `|Λ₊ − Λ₋|` below which the monodromy is not diagonalizable.
pub const DISTINCT_TOL: f64 = 1e-10;

/// Eigen-data of the monodromy in the `E±` basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyEigen {
    pub lambda_plus: C,
    pub lambda_minus: C,
    pub gamma_plus: C,
    pub gamma_minus: C,
    /// `(c₊, c₋)` with `E_[+] = c₊E₊ + c₋E₋`.
    pub combo_plus: [C; 2],
    pub combo_minus: [C; 2],
    /// Largest deviation from the eigenvalues computed from trace and determinant.
    pub direct_deviation: f64,
}

impl MonodromyEigen {
    /// Series exponent of `E_[±]`: `−γ±`.
    pub fn exponent(&self, plus: bool) -> C {
        if plus {
            -self.gamma_plus
        } else {
            -self.gamma_minus
        }
    }

    pub fn combo(&self, plus: bool) -> [C; 2] {
        if plus {
            self.combo_plus
        } else {
            self.combo_minus
        }
    }

    pub fn lambda(&self, plus: bool) -> C {
        if plus {
            self.lambda_plus
        } else {
            self.lambda_minus
        }
    }

    /// Largest `|𝐌ᵀc − Λc|` over both combinations.
    pub fn eigen_residual(&self, m: &Matrix2) -> f64 {
        let mt = m.transpose();
        [(self.combo_plus, self.lambda_plus), (self.combo_minus, self.lambda_minus)]
            .iter()
            .map(|(c, l)| {
                let v = mt.apply(*c);
                (v[0] - l * c[0]).norm().max((v[1] - l * c[1]).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Cauchy data of `E_[±]` at `1̂` from those of `E±`.
    pub fn anchor(&self, plus: bool, cauchy: &[SolutionFrame; 2]) -> SolutionFrame {
        let c = self.combo(plus);
        SolutionFrame::new(
            CoverPoint::ONE,
            c[0] * cauchy[0].value + c[1] * cauchy[1].value,
            c[0] * cauchy[0].deriv + c[1] * cauchy[1].deriv,
        )
    }
}

/// `γ = i Log(Λ)/(2π)` with the principal logarithm.
pub fn laurent_exponent(lambda: C) -> C {
    C::new(0.0, 1.0) * lambda.ln() / (2.0 * std::f64::consts::PI)
}

/// Eigenvalues and eigen-combinations of the monodromy.
pub fn monodromy_eigen(m: &Matrix2, bd: &BoundaryData) -> Result<MonodromyEigen> {
    monodromy_eigen_with_branches(m, bd, false, false)
}

/// Same as [`monodromy_eigen`] with either square root taken on the other branch.
pub fn monodromy_eigen_with_branches(
    m: &Matrix2,
    bd: &BoundaryData,
    flip_first: bool,
    flip_second: bool,
) -> Result<MonodromyEigen> {
    let i = C::new(0.0, 1.0);
    let (a, b, e1) = (bd.a(), bd.b(), bd.one);
    let diff_plus = a[0] * a[0] - b[0] * b[0];
    let diff_minus = a[1] * a[1] - b[1] * b[1];
    let flip = |f: bool| if f { -1.0 } else { 1.0 };
    let x = (i * diff_minus).sqrt() * flip(flip_first);
    let y = (i * diff_plus).sqrt() * flip(flip_second);
    if x.norm() == 0.0 {
        return Err(Error::NonDiagonalizable);
    }
    let c = (4.0 * bd.mu).exp() / (2.0 * e1[0] * e1[1]);
    let d = a[0] * a[1] + b[0] * b[1];
    let s = y / x;
    let mut lp = c * (d + diff_minus * s);
    let mut lm = c * (d - diff_minus * s);
    // the smaller root loses digits to cancellation; use Λ₊Λ₋ = 1
    if lp.norm() < lm.norm() {
        lp = 1.0 / lm;
    } else {
        lm = 1.0 / lp;
    }
    let scale = lp.norm().max(lm.norm()).max(1.0);
    if (lp - lm).norm() < DISTINCT_TOL * scale {
        return Err(Error::NonDiagonalizable);
    }
    let (d1, d2) = m.eigenvalues();
    let dev = |l: C| (l - d1).norm().min((l - d2).norm()) / scale;
    Ok(MonodromyEigen {
        lambda_plus: lp,
        lambda_minus: lm,
        gamma_plus: laurent_exponent(lp),
        gamma_minus: laurent_exponent(lm),
        combo_plus: [x, y],
        combo_minus: [x, -y],
        direct_deviation: dev(lp).max(dev(lm)),
    })
}

/// Truncated two-sided series `Σ_{k=−N}^{N} g_k z^{k+γ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentSolution {
    /// Exponent shift `γ`.
    pub gamma: C,
    /// Truncation half-width.
    pub n: usize,
    /// `g_{−N} .. g_N`.
    pub coeffs: Vec<C>,
    /// `max(|g_{−N}|, |g_N|) / max_k |g_k|`.
    pub tail_ratio: f64,
    /// Normwise recurrence residual `max_k |row_k| / max_k Σ|terms_k|`.
    pub residual: f64,
    /// `|series'(1) − anchor'| / max(1, |anchor'|)`.
    pub anchor_mismatch: f64,
}

/// JSON layout of a series.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaurentExport {
    pub gamma: [f64; 2],
    #[serde(rename = "N")]
    pub n: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl LaurentSolution {
    /// `g_k` for `|k| ≤ N`.
    pub fn coeff(&self, k: i64) -> C {
        let idx = k + self.n as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            C::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn export(&self) -> LaurentExport {
        LaurentExport {
            gamma: [self.gamma.re, self.gamma.im],
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

/// Settings for [`build_series_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesOptions {
    pub cap: usize,
    pub tail_tol: f64,
    pub residual_tol: f64,
    pub anchor_tol: f64,
    /// Return the capped result instead of failing with `NoDecay`.
    pub force: bool,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { cap: 4096, tail_tol: 1e-14, residual_tol: 1e-12, anchor_tol: 1e-7, force: false }
    }
}

/// Minimum truncation half-width.
pub const MIN_N: usize = 16;

/// Coefficients `(sub, diag, sup)` of the recurrence row for index `k`.
fn row(params: &HeunParams, gamma: C, k: i64) -> (C, C, C) {
    let l = params.order() as f64;
    let mu = params.mu;
    let e = gamma + k as f64;
    (-mu * (e + l), e * (e + l) + params.lambda, mu * (e + 1.0))
}

/// Builds the series for exponent `gamma`, scaled to the anchor value at `1̂`.
pub fn build_series(params: &HeunParams, gamma: C, anchor: &SolutionFrame, n: usize) -> Result<LaurentSolution> {
    build_series_with(params, gamma, anchor, n, &SeriesOptions::default())
}

pub fn build_series_with(
    params: &HeunParams,
    gamma: C,
    anchor: &SolutionFrame,
    n: usize,
    opts: &SeriesOptions,
) -> Result<LaurentSolution> {
    if anchor.point != CoverPoint::ONE {
        return Err(Error::InvalidParams("anchor must be given at the lifted unit".into()));
    }
    if anchor.value.norm() == 0.0 && anchor.deriv.norm() == 0.0 {
        return Err(Error::ZeroSolution);
    }
    let mut n = n.max(MIN_N);
    loop {
        let sol = solve_truncated(params, gamma, anchor, n)?;
        let ok =
            sol.tail_ratio < opts.tail_tol && sol.residual < opts.residual_tol && sol.anchor_mismatch < opts.anchor_tol;
        if ok {
            return Ok(sol);
        }
        if n >= opts.cap {
            return if opts.force { Ok(sol) } else { Err(Error::NoDecay(n)) };
        }
        n = (2 * n).min(opts.cap);
    }
}

fn solve_truncated(params: &HeunParams, gamma: C, anchor: &SolutionFrame, n: usize) -> Result<LaurentSolution> {
    let size = 2 * n + 1;
    let ni = n as i64;
    let mut sub = vec![C::new(0.0, 0.0); size];
    let mut diag = vec![C::new(0.0, 0.0); size];
    let mut sup = vec![C::new(0.0, 0.0); size];
    for (j, k) in (-ni..=ni).enumerate() {
        let (a, b, c) = row(params, gamma, k);
        let s = a.norm().max(b.norm()).max(c.norm()).max(1.0);
        sub[j] = if j > 0 { a / s } else { C::new(0.0, 0.0) };
        diag[j] = b / s;
        sup[j] = if j + 1 < size { c / s } else { C::new(0.0, 0.0) };
    }
    let lu = TridiagLu::factor(&sub, &diag, &sup)?;
    // inverse iteration from a smooth start concentrated near k = 0
    let mut x: Vec<C> = (-ni..=ni).map(|k| C::new(1.0 / (1.0 + (k * k) as f64), 0.0)).collect();
    normalize(&mut x);
    for _ in 0..50 {
        let mut y = lu.solve(&x);
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        normalize(&mut y);
        let phase = inner(&x, &y);
        let phase = if phase.norm() > 0.0 { phase / phase.norm() } else { C::new(1.0, 0.0) };
        let change = x.iter().zip(&y).map(|(a, b)| (a * phase - b).norm()).fold(0.0, f64::max);
        x = y;
        if change < 1e-15 {
            break;
        }
    }
    // normalization at z = 1
    let (mut val, mut der) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    for (j, k) in (-ni..=ni).enumerate() {
        val += x[j];
        der += x[j] * (gamma + k as f64);
    }
    let alpha = if anchor.value.norm() > 0.0 && val.norm() > 0.0 {
        anchor.value / val
    } else {
        let den = val.norm_sqr() + der.norm_sqr();
        if den == 0.0 {
            return Err(Error::SingularSystem);
        }
        (val.conj() * anchor.value + der.conj() * anchor.deriv) / den
    };
    let coeffs: Vec<C> = x.iter().map(|v| v * alpha).collect();
    let anchor_mismatch = (der * alpha - anchor.deriv).norm() / anchor.deriv.norm().max(1.0);
    let gmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tail_ratio = coeffs[0].norm().max(coeffs[size - 1].norm()) / gmax;
    let residual = recurrence_residual(params, gamma, &coeffs, n);
    Ok(LaurentSolution { gamma, n, coeffs, tail_ratio, residual, anchor_mismatch })
}

/// Normwise residual of the (unscaled) recurrence on the truncated range.
pub fn recurrence_residual(params: &HeunParams, gamma: C, coeffs: &[C], n: usize) -> f64 {
    let ni = n as i64;
    let g = |k: i64| -> C {
        if k.abs() > ni {
            C::new(0.0, 0.0)
        } else {
            coeffs[(k + ni) as usize]
        }
    };
    let (mut rmax, mut tmax) = (0.0f64, 0.0f64);
    for k in -ni..=ni {
        let (a, b, c) = row(params, gamma, k);
        let t = [a * g(k - 1), b * g(k), c * g(k + 1)];
        rmax = rmax.max((t[0] + t[1] + t[2]).norm());
        tmax = tmax.max(t.iter().map(|v| v.norm()).sum());
    }
    if tmax == 0.0 {
        0.0
    } else {
        rmax / tmax
    }
}

fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: &mut [C]) {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// LU factorization of a tridiagonal matrix with partial pivoting.
struct TridiagLu {
    /// Upper factor diagonals: `u0` main, `u1` first super, `u2` second super.
    u0: Vec<C>,
    u1: Vec<C>,
    u2: Vec<C>,
    /// Multipliers of the elimination.
    l: Vec<C>,
    /// Whether rows `j` and `j+1` were swapped at step `j`.
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(sub: &[C], diag: &[C], sup: &[C]) -> Result<Self> {
        let n = diag.len();
        let mut u0 = diag.to_vec();
        let mut u1: Vec<C> = sup.to_vec();
        let mut u2 = vec![C::new(0.0, 0.0); n];
        let mut l = vec![C::new(0.0, 0.0); n];
        let mut swap = vec![false; n];
        let mut lower: Vec<C> = sub.to_vec();
        let scale = diag.iter().chain(sub).chain(sup).map(|x| x.norm()).fold(0.0, f64::max);
        for j in 0..n.saturating_sub(1) {
            // candidates: row j (u0[j], u1[j], u2[j]) and row j+1 (lower[j+1], u0[j+1], u1[j+1])
            if lower[j + 1].norm() > u0[j].norm() {
                swap[j] = true;
                let (a0, a1, a2) = (u0[j], u1[j], u2[j]);
                u0[j] = lower[j + 1];
                u1[j] = u0[j + 1];
                u2[j] = u1[j + 1];
                lower[j + 1] = a0;
                u0[j + 1] = a1;
                u1[j + 1] = a2;
            }
            if u0[j].norm() == 0.0 {
                u0[j] = C::new(f64::EPSILON * scale.max(1.0), 0.0);
            }
            let m = lower[j + 1] / u0[j];
            l[j + 1] = m;
            u0[j + 1] -= m * u1[j];
            u1[j + 1] -= m * u2[j];
        }
        if n > 0 && u0[n - 1].norm() == 0.0 {
            u0[n - 1] = C::new(f64::EPSILON * scale.max(1.0), 0.0);
        }
        if !u0.iter().all(|x| x.is_finite()) {
            return Err(Error::SingularSystem);
        }
        Ok(TridiagLu { u0, u1, u2, l, swap })
    }

    fn solve(&self, b: &[C]) -> Vec<C> {
        let n = b.len();
        let mut y = b.to_vec();
        for j in 0..n.saturating_sub(1) {
            if self.swap[j] {
                y.swap(j, j + 1);
            }
            let t = y[j];
            y[j + 1] -= self.l[j + 1] * t;
        }
        let mut x = vec![C::new(0.0, 0.0); n];
        for j in (0..n).rev() {
            let mut acc = y[j];
            if j + 1 < n {
                acc -= self.u1[j] * x[j + 1];
            }
            if j + 2 < n {
                acc -= self.u2[j] * x[j + 2];
            }
            x[j] = acc / self.u0[j];
        }
        x
    }
}

/// `Σ g_k ẑ^{k+γ}`, summed from the smallest terms outward.
pub fn eval_series(ls: &LaurentSolution, at: CoverPoint) -> C {
    sum_terms(ls, at, false)
}

/// `z`-derivative of the series.
pub fn eval_series_deriv(ls: &LaurentSolution, at: CoverPoint) -> C {
    sum_terms(ls, at, true)
}

fn sum_terms(ls: &LaurentSolution, at: CoverPoint, deriv: bool) -> C {
    let ni = ls.n as i64;
    let mut terms: Vec<C> = (-ni..=ni)
        .map(|k| {
            let e = ls.gamma + k as f64;
            let g = ls.coeff(k);
            if deriv {
                g * e * at.pow(e - 1.0)
            } else {
                g * at.pow(e)
            }
        })
        .collect();
    terms.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    terms.iter().sum()
}
