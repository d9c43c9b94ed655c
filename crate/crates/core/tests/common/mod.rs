//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use heunsym::josephson::JosephsonParams;
use heunsym::{Complex64 as C, CoverPoint, HeunParams, Matrix2};

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn params(ell: u32, lambda: C, mu: C) -> HeunParams {
    HeunParams::new(ell, lambda, mu).unwrap()
}

/// Parameter sets used across tests, one with complex λ.
pub fn param_sets() -> Vec<HeunParams> {
    vec![params(1, c(1.0, 0.0), c(0.5, 0.0)), params(2, c(0.8, 0.3), c(0.6, 0.0)), params(3, c(1.7, 0.0), c(-0.4, 0.2))]
}

pub fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// `(E, dE/dz)` transported along the straight segment in `w = ln z` with
/// fixed-step classical RK4.
pub fn rk4_segment(p: &HeunParams, from: CoverPoint, y: [C; 2], to: CoverPoint, steps: usize) -> [C; 2] {
    let l = p.order() as f64;
    let (lam, mu) = (p.lambda, p.mu);
    let (w0, w1) = (from.log(), to.log());
    let dw = w1 - w0;
    let f = |w: C, y: [C; 2]| -> [C; 2] {
        let z = w.exp();
        let e2 = -(((l + 1.0) * z + mu * (1.0 - z * z)) * y[1] + (-mu * (l + 1.0) * z + lam) * y[0]) / (z * z);
        [dw * z * y[1], dw * z * e2]
    };
    let h = 1.0 / steps as f64;
    let mut y = y;
    for k in 0..steps {
        let w = w0 + dw * (k as f64 * h);
        let k1 = f(w, y);
        let k2 = f(w + dw * (h / 2.0), [y[0] + k1[0] * (h / 2.0), y[1] + k1[1] * (h / 2.0)]);
        let k3 = f(w + dw * (h / 2.0), [y[0] + k2[0] * (h / 2.0), y[1] + k2[1] * (h / 2.0)]);
        let k4 = f(w + dw * h, [y[0] + k3[0] * h, y[1] + k3[1] * h]);
        for i in 0..2 {
            y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
    }
    y
}

/// Cauchy data of `E±` at `1̂`: value 1, derivative `μ ± √(λ+μ²)`.
pub fn eigen_cauchy(p: &HeunParams) -> [[C; 2]; 2] {
    let s = (p.lambda + p.mu * p.mu).sqrt();
    [[c(1.0, 0.0), p.mu + s], [c(1.0, 0.0), p.mu - s]]
}

/// `(E₊, E₋)` at `to` from `1̂` through the given waypoints, steps per unit of `|Δw|`.
pub fn rk4_eigen(p: &HeunParams, via: &[CoverPoint], density: f64) -> [C; 2] {
    let mut out = [c(0.0, 0.0); 2];
    for (i, y0) in eigen_cauchy(p).into_iter().enumerate() {
        let mut y = y0;
        let mut at = CoverPoint::ONE;
        for &next in via {
            let steps = ((next.log() - at.log()).norm() * density).ceil().max(1.0) as usize;
            y = rk4_segment(p, at, y, next, steps);
            at = next;
        }
        out[i] = y[0];
    }
    out
}

/// Waypoints that reach `to` by first turning at `|z| = 1` and then moving radially.
pub fn arc_then_ray(to: CoverPoint) -> Vec<CoverPoint> {
    let mut via = Vec::new();
    let turns = (to.phi.abs() / (PI / 4.0)).ceil().max(1.0) as usize;
    for k in 1..=turns {
        via.push(CoverPoint::new(1.0, to.phi * k as f64 / turns as f64));
    }
    via.push(to);
    via
}

/// Derivatives of order 1 and 2 of a holomorphic function near `at` from
/// samples on a small circle (trapezoidal Cauchy integral).
pub fn contour_derivatives(f: impl Fn(CoverPoint) -> C, at: CoverPoint, radius: f64, n: usize) -> (C, C) {
    let z0 = at.project();
    let w0 = at.log();
    let (mut d1, mut d2) = (c(0.0, 0.0), c(0.0, 0.0));
    for k in 0..n {
        let th = 2.0 * PI * k as f64 / n as f64;
        let u = C::from_polar(radius, th);
        // ln(z0 + u) on the sheet of `at`
        let w = w0 + (1.0 + u / z0).ln();
        let v = f(CoverPoint::from_log(w));
        d1 += v / u;
        d2 += v / (u * u);
    }
    (d1 / n as f64, 2.0 * d2 / n as f64)
}

/// `𝐌` from the oracle: transport both basis functions once around `|z| = 1`.
pub fn loop_oracle(p: &HeunParams) -> Matrix2 {
    let start = CoverPoint::ONE;
    let mut ends = Vec::new();
    for y0 in eigen_cauchy(p) {
        let mut y = y0;
        let mut at = start;
        for k in 1..=8 {
            let next = CoverPoint::new(1.0, 2.0 * PI * k as f64 / 8.0);
            y = rk4_segment(p, at, y, next, 600);
            at = next;
        }
        ends.push(y);
    }
    let [cp, cm] = eigen_cauchy(p);
    let x = Matrix2::new(cp[0], cp[1], cm[0], cm[1]);
    let y = Matrix2::new(ends[0][0], ends[0][1], ends[1][0], ends[1][1]);
    y * x.inverse().unwrap()
}

/// Fixed-step RK4 for `(φ, P)` from `t = 0`, reporting at the given times.
pub fn rk4_states(jp: &JosephsonParams, phi0: f64, times: &[f64], h_max: f64) -> Vec<(f64, f64)> {
    let f = |t: f64, y: [f64; 2]| jp.rhs(t, y[0]);
    let step = |t: f64, y: [f64; 2], h: f64| -> [f64; 2] {
        let k1 = f(t, y);
        let k2 = f(t + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(t + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    };
    let mut out = vec![(0.0, 0.0); times.len()];
    for dir in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] * dir >= 0.0).collect();
        idx.sort_by(|&a, &b| (times[a] * dir).total_cmp(&(times[b] * dir)));
        let (mut t, mut y) = (0.0, [phi0, 0.0]);
        for i in idx {
            let span = times[i] - t;
            let n = (span.abs() / h_max).ceil() as usize;
            for _ in 0..n {
                y = step(t, y, span / n as f64);
                t += span / n as f64;
            }
            t = times[i];
            out[i] = (y[0], y[1]);
        }
    }
    out
}

/// `(φ, P)` at the given times with a step fine enough for 1e-10.
pub fn phase_oracle(jp: &JosephsonParams, phi0: f64, times: &[f64]) -> Vec<(f64, f64)> {
    rk4_states(jp, phi0, times, jp.period() / 8000.0)
}
