mod common;

use common::*;
use heunsym::cover::{apply_lift, LiftMap};
use heunsym::monodromy::{bracket, collect_boundary_data, w_functional, Sign};
use heunsym::solver::{split_eigen, theta_apply, wronskian, CoverFunction, EigenBasis, SolutionFrame, Theta};
use heunsym::{Complex64 as C, CoverPoint};
use proptest::prelude::*;

fn points() -> Vec<CoverPoint> {
    vec![
        CoverPoint::new(0.6, 0.4),
        CoverPoint::new(1.8, -2.5),
        CoverPoint::new(1.1, 3.0),
        CoverPoint::new(0.7, 7.5),
        CoverPoint::new(1.5, -8.0),
    ]
}

#[test]
fn basis_matches_fixed_step_oracle() {
    for p in param_sets() {
        let b = EigenBasis::new(p, 1e-13).unwrap();
        for at in points() {
            let got = b.values(at).unwrap();
            let want = rk4_eigen(&p, &arc_then_ray(at), 400.0);
            for i in 0..2 {
                assert!(rel(got[i], want[i]) < 1e-9, "{at} {i}: {} vs {}", got[i], want[i]);
            }
        }
    }
}

#[test]
fn oracle_is_path_independent() {
    // the cover is simply connected: a detour through ρ = 2 changes nothing
    let p = &param_sets()[1];
    let to = CoverPoint::new(0.8, 2.2);
    let direct = rk4_eigen(p, &arc_then_ray(to), 400.0);
    let detour = rk4_eigen(p, &[CoverPoint::new(2.0, 0.0), CoverPoint::new(2.0, 2.2), to], 400.0);
    assert!(rel(direct[0], detour[0]) < 1e-10 && rel(direct[1], detour[1]) < 1e-10);
}

#[test]
fn theta_images_solve_equation_by_contour_derivatives() {
    for p in param_sets() {
        let b = EigenBasis::new(p, 1e-13).unwrap();
        let ops = b.operators();
        let s = b.handle(c(0.3, -0.8), c(-1.1, 0.4));
        let l1 = p.order() as f64 + 1.0;
        for at in points().into_iter().take(3) {
            for th in [Theta::A, Theta::B, Theta::C] {
                let img = ops.image(th, &s);
                let f = |q: CoverPoint| img.value(q).unwrap();
                let (d1, d2) = contour_derivatives(f, at, 0.05 * at.rho, 48);
                let z = at.project();
                let v = f(at);
                let terms = [z * z * d2, (l1 * z + p.mu * (1.0 - z * z)) * d1, (-p.mu * l1 * z + p.lambda) * v];
                let scale: f64 = terms.iter().map(|t| t.norm()).sum();
                let res = (terms[0] + terms[1] + terms[2]).norm() / scale;
                assert!(res < 1e-9, "{:?} at {at}: {res:e}", th);
            }
        }
    }
}

#[test]
fn theta_c_eigenfunctions() {
    for p in param_sets() {
        let b = EigenBasis::new(p, 1e-13).unwrap();
        for at in points() {
            let v = b.values(at).unwrap();
            let cp = theta_apply(Theta::C, &b.plus(), at).unwrap();
            let cm = theta_apply(Theta::C, &b.minus(), at).unwrap();
            assert!(rel(cp, v[0]) < 1e-10);
            assert!(rel(cm, -v[1]) < 1e-10);
        }
    }
}

#[test]
fn wronskian_constant_along_cover() {
    for p in param_sets() {
        let b = EigenBasis::new(p, 1e-13).unwrap();
        let w1 = wronskian(&b.plus(), &b.minus(), CoverPoint::ONE).unwrap();
        // at 1̂: E₊ = E₋ = 1, so W = e^{−2μ}(E₊' − E₋') = 2e^{−2μ}√(λ+μ²)
        let want = 2.0 * (-2.0 * p.mu).exp() * (p.lambda + p.mu * p.mu).sqrt();
        assert!(rel(w1, want) < 1e-13);
        for at in points() {
            let w = wronskian(&b.plus(), &b.minus(), at).unwrap();
            let (v, d) = (b.values(at).unwrap(), b.derivs(at).unwrap());
            let z = at.project();
            let pre = at.powi(1 - p.ell as i32) * (-p.mu * (z + 1.0 / z)).exp();
            // size of the two products that cancel
            let scale = pre.norm() * ((d[0] * v[1]).norm() + (d[1] * v[0]).norm());
            assert!((w - w1).norm() < 1e-11 * scale.max(w1.norm()), "{at}");
        }
    }
}

#[test]
fn bracket_vanishes_on_eigenbasis() {
    for p in param_sets() {
        let b = EigenBasis::new(p, 1e-13).unwrap();
        for at in points() {
            let v = bracket(&b.plus(), &b.minus(), at, at.inv()).unwrap();
            let scale = b.values(at).unwrap()[0].norm() * b.values(at.inv()).unwrap()[1].norm();
            assert!(v.norm() < 1e-10 * scale.max(1.0), "{at}: {v}");
        }
        // but not on a generic pair
        let s = b.handle(c(1.0, 0.0), c(0.5, 0.0));
        let v = bracket(&s, &b.minus(), CoverPoint::new(1.3, 0.4), CoverPoint::new(1.3, 0.4).inv()).unwrap();
        assert!(v.norm() > 1e-3);
    }
}

/// Both sides of the algebraic identity behind the Θ_A / Θ_B expansions.
fn identity_sides(b: &EigenBasis, upper: bool, at: CoverPoint, a_f: C, b_f: C) -> (C, C) {
    let p = b.params();
    let ps = b.polys();
    let (sg, par, tw) = (if upper { 1.0 } else { -1.0 }, p.parity(), p.two_omega);
    let z = at.project();
    let l = p.ell as i32;
    let qmp = ps.q.eval_c64(z) + p.mu * z * z * ps.p.eval_c64(z);
    let zp = at.powi(1 - l) * ps.p.eval_c64(z);
    let lhs = (p.mu * (z + 1.0 / z)).exp() * (zp * a_f / tw - sg * par * qmp * b_f);
    let s1 = b.handle(c(1.0, 0.0), c(0.7, -0.2));
    let s2 = b.handle(c(-0.4, 0.9), c(1.0, 0.3));
    let one1 = s1.value(CoverPoint::ONE).unwrap();
    let one2 = s2.value(CoverPoint::ONE).unwrap();
    let pre = (2.0 * p.mu).exp() / (2.0 * tw * one1 * one2);
    let bb = sg * b_f;
    let rhs = pre
        * ((-zp * a_f + sg * tw * par * qmp * b_f) * bracket(&s1, &s2, at, at.inv()).unwrap()
            + w_functional(Sign::Plus, a_f, bb, &s2, at).unwrap() * s1.value(at).unwrap()
            + w_functional(Sign::Minus, a_f, bb, &s1, at).unwrap() * s2.value(at).unwrap());
    (lhs, rhs)
}

#[test]
fn polylocal_identity_for_arbitrary_pairs() {
    for p in param_sets() {
        let b = EigenBasis::new(p, 1e-13).unwrap();
        for (k, at) in points().into_iter().enumerate() {
            let a_f = c(0.3 + k as f64, -0.7);
            let b_f = c(-1.2, 0.4 * k as f64);
            for upper in [true, false] {
                let (lhs, rhs) = identity_sides(&b, upper, at, a_f, b_f);
                assert!(rel(lhs, rhs) < 1e-9, "{at} upper={upper}: {lhs} vs {rhs}");
            }
        }
    }
}

/// `W±[𝒜, ℬ; E](ẑ, 1/ẑ)` term by term from the `q`-based form.
fn w_terms(b: &EigenBasis, upper: bool, a_f: C, b_f: C, e: [C; 2], at: CoverPoint) -> [C; 4] {
    let p = b.params();
    let ps = b.polys();
    let (sg, tw, par) = (if upper { 1.0 } else { -1.0 }, p.two_omega, p.parity());
    let z = at.project();
    let zi = 1.0 / z;
    let l = p.ell as i32;
    let qmp = |x: C| ps.q.eval_c64(x) + p.mu * x * x * ps.p.eval_c64(x);
    [
        sg * tw * par * qmp(zi) * a_f * e[0],
        -tw * par * qmp(z) * b_f * e[1],
        -sg * at.powi(l - 1) * ps.p.eval_c64(zi) * b_f * e[0],
        at.powi(1 - l) * ps.p.eval_c64(z) * a_f * e[1],
    ]
}

#[test]
fn w_functionals_constant_and_expand_theta_a() {
    for p in param_sets() {
        let b = EigenBasis::new(p, 1e-13).unwrap();
        let e1 = b.values(CoverPoint::ONE).unwrap();
        let tw = p.two_omega;
        for (idx, s) in [(0usize, 1.0f64), (1, -1.0)] {
            let fields = |z: CoverPoint| {
                let a_f = b.values(apply_lift(LiftMap::B, z).shifted(-1)).unwrap()[idx];
                let b_f = s * b.values(apply_lift(LiftMap::A, z)).unwrap()[idx];
                (a_f, b_f)
            };
            // value of the library functional, and the size of its terms
            let w = |upper: bool, z: CoverPoint, which: usize| {
                let (a_f, b_f) = fields(z);
                let h = if which == 0 { b.plus() } else { b.minus() };
                let sign = if upper { Sign::Plus } else { Sign::Minus };
                let lib = w_functional(sign, a_f, b_f, &h, z).unwrap();
                let e = [h.value(z).unwrap(), h.value(z.inv()).unwrap()];
                let terms = w_terms(&b, upper, a_f, b_f, e, z);
                let sum = terms[0] + terms[1] + terms[2] + terms[3];
                assert!((lib - sum).norm() < 1e-12 * terms.iter().map(|t| t.norm()).sum::<f64>());
                (lib, terms.iter().map(|t| t.norm()).sum::<f64>())
            };
            let (wp0, _) = w(true, CoverPoint::ONE, 1);
            let (wm0, _) = w(false, CoverPoint::ONE, 0);
            let mut varies = 0.0f64;
            for at in points() {
                let (wp, sp) = w(true, at, 1);
                let (wm, sm) = w(false, at, 0);
                assert!((wp - wp0).norm() < 1e-11 * sp.max(wp0.norm()), "{at}");
                assert!((wm - wm0).norm() < 1e-11 * sm.max(wm0.norm()), "{at}");
                // the other pairing is not constant
                let (other, so) = w(true, at, 0);
                varies = varies.max((other - wp0).norm() / so);
                // expansion of Θ_A[E±] in the basis with those constants
                let v = b.values(at).unwrap();
                let want = -s * (2.0 * p.mu).exp() / (2.0 * tw * e1[0] * e1[1]) * (wp0 * v[0] + wm0 * v[1]);
                let h = if idx == 0 { b.plus() } else { b.minus() };
                let got = theta_apply(Theta::A, &h, at).unwrap();
                assert!(rel(got, want) < 1e-9, "{at}: {got} vs {want}");
            }
            assert!(varies > 1e-6);
        }
    }
}

#[test]
fn theta_ab_expansions_from_boundary_values() {
    for p in param_sets() {
        let b = EigenBasis::new(p, 1e-13).unwrap();
        let bd = collect_boundary_data(&b).unwrap();
        let (a, bb, e1) = (bd.a(), bd.b(), bd.one);
        let pre = (2.0 * p.mu).exp() / (2.0 * p.two_omega);
        for (idx, s) in [(0usize, 1.0f64), (1, -1.0)] {
            let plus_coef = pre * bd.delta_plus / e1[0] * (a[idx] - s * bb[idx]);
            let minus_coef = pre * bd.delta_minus / e1[1] * (a[idx] + s * bb[idx]);
            let h = if idx == 0 { b.plus() } else { b.minus() };
            for (th, sign_minus) in [(Theta::A, -1.0), (Theta::B, 1.0)] {
                let img = b.operators().image(th, &h);
                let jet = img.jet(CoverPoint::ONE, 1).unwrap();
                let frame = SolutionFrame::new(CoverPoint::ONE, jet.coeff(0), jet.coeff(1));
                let (cp, cm) = split_eigen(&p, &frame).unwrap();
                assert!(rel(cp, plus_coef) < 1e-9, "{th:?} {idx}");
                assert!(rel(cm, sign_minus * minus_coef) < 1e-9, "{th:?} {idx}");
                for at in points() {
                    let v = b.values(at).unwrap();
                    assert!(rel(img.value(at).unwrap(), cp * v[0] + cm * v[1]) < 1e-9, "{th:?} {idx} {at}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigen_relation_holds_everywhere(
        lr in -0.7f64..0.7,
        phi in -9.0f64..9.0,
        set in 0usize..3,
    ) {
        let p = param_sets()[set];
        let b = EigenBasis::new(p, 1e-12).unwrap();
        let r = b.eigen_residual(CoverPoint::new(lr.exp(), phi)).unwrap();
        prop_assert!(r[0] < 1e-9 && r[1] < 1e-9);
    }

    #[test]
    fn solution_frames_round_trip(
        re in -2.0f64..2.0, im in -2.0f64..2.0,
        lr in -0.6f64..0.6, phi in -4.0f64..4.0,
    ) {
        let p = param_sets()[0];
        let b = EigenBasis::new(p, 1e-12).unwrap();
        let at = CoverPoint::new(lr.exp(), phi);
        let h = b.handle(c(re, im), c(1.0, -0.5));
        let f = h.frame(at).unwrap();
        let back = b.solution(&f).unwrap().value(CoverPoint::ONE).unwrap();
        prop_assert!(rel(back, c(re, im) + c(1.0, -0.5)) < 1e-9);
    }
}
