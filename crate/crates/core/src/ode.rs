//! Adaptive Dormand–Prince 5(4) integrator over real time, generic in the
//! state element (`f64` or `Complex64`) and the state dimension.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Scalar type a state vector is made of.
pub trait Element:
    Copy + Default + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn abs(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Element for f64 {
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Element for Complex64 {
    fn abs(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

/// Step-size control settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on `|h|` (infinite by default).
    pub h_max: f64,
    pub max_steps: usize,
}

impl Options {
    pub fn with_tol(tol: f64) -> Self {
        Options { rtol: tol, atol: tol, ..Options::default() }
    }
}

impl Default for Options {
    fn default() -> Self {
        Options { rtol: 1e-12, atol: 1e-12, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

/// The controller could not make progress at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepUnderflow {
    pub t: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn axpy<T: Element, const N: usize>(y: &[T; N], h: f64, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (w, k) in terms {
        if *w == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] = out[i] + k[i] * (h * w);
        }
    }
    out
}

/// Stateful integrator that can be advanced through a sequence of times.
pub struct Integrator<T: Element, const N: usize, F: FnMut(f64, &[T; N]) -> [T; N]> {
    f: F,
    t: f64,
    y: [T; N],
    k1: [T; N],
    h: f64,
    opts: Options,
    pub accepted: usize,
    pub rejected: usize,
}

impl<T: Element, const N: usize, F: FnMut(f64, &[T; N]) -> [T; N]> Integrator<T, N, F> {
    pub fn new(mut f: F, t0: f64, y0: [T; N], opts: Options) -> Self {
        let k1 = f(t0, &y0);
        Integrator { f, t: t0, y: y0, k1, h: 0.0, opts, accepted: 0, rejected: 0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[T; N] {
        &self.y
    }

    fn norm(&self, v: &[T; N], scale_ref: &[T; N]) -> f64 {
        let mut m = 0.0f64;
        for i in 0..N {
            let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(scale_ref[i].abs());
            m = m.max(v[i].abs() / sc);
        }
        m
    }

    fn initial_step(&mut self, span: f64) -> f64 {
        let d0 = self.norm(&self.y, &self.y);
        let d1 = self.norm(&self.k1, &self.y);
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span.abs()).min(self.opts.h_max).max(1e-12 * span.abs())
    }

    /// Integrates to `t_end` (either direction) and returns the state there.
    pub fn advance_to(&mut self, t_end: f64) -> Result<[T; N], StepUnderflow> {
        let span = t_end - self.t;
        if span == 0.0 {
            return Ok(self.y);
        }
        let dir = span.signum();
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = dir * self.initial_step(span);
        }
        let mut steps = 0usize;
        while (t_end - self.t) * dir > 0.0 {
            steps += 1;
            if steps > self.opts.max_steps {
                return Err(StepUnderflow { t: self.t });
            }
            let remaining = t_end - self.t;
            let mut h = self.h.abs().min(self.opts.h_max) * dir;
            let last = h.abs() >= remaining.abs();
            if last {
                h = remaining;
            }
            let min_h = 1e-14 * self.t.abs().max(remaining.abs()).max(1.0);
            if h.abs() < min_h && !last {
                return Err(StepUnderflow { t: self.t });
            }
            let (y_new, k7, err) = self.trial(h);
            if err <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                self.accepted += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    self.h = h.abs() * fac * dir;
                }
            } else {
                self.rejected += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                self.h = h.abs() * fac * dir;
                if self.h.abs() < min_h {
                    return Err(StepUnderflow { t: self.t });
                }
            }
        }
        Ok(self.y)
    }

    fn trial(&mut self, h: f64) -> ([T; N], [T; N], f64) {
        let t = self.t;
        let y = self.y;
        let k1 = self.k1;
        let k2 = (self.f)(t + C[1] * h, &axpy(&y, h, &[(A[1][0], &k1)]));
        let k3 = (self.f)(t + C[2] * h, &axpy(&y, h, &[(A[2][0], &k1), (A[2][1], &k2)]));
        let k4 = (self.f)(t + C[3] * h, &axpy(&y, h, &[(A[3][0], &k1), (A[3][1], &k2), (A[3][2], &k3)]));
        let k5 =
            (self.f)(t + C[4] * h, &axpy(&y, h, &[(A[4][0], &k1), (A[4][1], &k2), (A[4][2], &k3), (A[4][3], &k4)]));
        let k6 = (self.f)(
            t + h,
            &axpy(&y, h, &[(A[5][0], &k1), (A[5][1], &k2), (A[5][2], &k3), (A[5][3], &k4), (A[5][4], &k5)]),
        );
        let y_new = axpy(&y, h, &[(A[6][0], &k1), (A[6][2], &k3), (A[6][3], &k4), (A[6][4], &k5), (A[6][5], &k6)]);
        let k7 = (self.f)(t + h, &y_new);
        let mut err_vec = [T::default(); N];
        for i in 0..N {
            let e = k1[i] * E[0] + k3[i] * E[2] + k4[i] * E[3] + k5[i] * E[4] + k6[i] * E[5] + k7[i] * E[6];
            err_vec[i] = e * h;
        }
        let finite = y_new.iter().all(|v| v.is_finite());
        let err = if finite { self.norm(&err_vec, &y_new) } else { f64::INFINITY };
        (y_new, k7, err)
    }
}

/// One-shot integration from `t0` to `t1`.
pub fn integrate<T, const N: usize, F>(
    f: F,
    t0: f64,
    y0: [T; N],
    t1: f64,
    opts: Options,
) -> Result<[T; N], StepUnderflow>
where
    T: Element,
    F: FnMut(f64, &[T; N]) -> [T; N],
{
    Integrator::new(f, t0, y0, opts).advance_to(t1)
}
