mod common;

use std::f64::consts::PI;

use common::*;
use heunsym::laurent::{
    build_series, build_series_with, eval_series, eval_series_deriv, monodromy_eigen, monodromy_eigen_with_branches,
    LaurentSolution, MonodromyEigen, SeriesOptions, MIN_N,
};
use heunsym::monodromy::MonodromyData;
use heunsym::{Complex64 as C, CoverPoint, EigenBasis, Error, HeunParams};
use proptest::prelude::*;

struct Setup {
    basis: EigenBasis,
    eig: MonodromyEigen,
}

fn setup(p: HeunParams) -> Setup {
    let basis = EigenBasis::new(p, 1e-13).unwrap();
    let md = MonodromyData::new(&basis).unwrap();
    let eig = monodromy_eigen(&md.m, &md.boundary).unwrap();
    Setup { basis, eig }
}

fn series(s: &Setup, plus: bool) -> LaurentSolution {
    let anchor = s.eig.anchor(plus, &s.basis.cauchy());
    build_series(s.basis.params(), s.eig.exponent(plus), &anchor, MIN_N).unwrap()
}

fn ode_combo(p: &HeunParams, c: [C; 2], at: CoverPoint) -> C {
    let v = rk4_eigen(p, &arc_then_ray(at), 500.0);
    c[0] * v[0] + c[1] * v[1]
}

#[test]
fn series_matches_oracle_on_three_circles() {
    for p in param_sets() {
        let s = setup(p);
        for plus in [true, false] {
            let ls = series(&s, plus);
            assert!(ls.n <= 4096);
            for rho in [0.5, 1.0, 2.0] {
                for phi in [-2.5, 0.4, 2.0] {
                    let at = CoverPoint::new(rho, phi);
                    let want = ode_combo(&p, s.eig.combo(plus), at);
                    let got = eval_series(&ls, at);
                    assert!(rel(got, want) < 1e-8, "{p:?} {plus} {at}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn power_times_eigen_combination_is_single_valued() {
    for p in param_sets() {
        let s = setup(p);
        for plus in [true, false] {
            let c = s.eig.combo(plus);
            let g = s.eig.exponent(plus);
            // z^{−exponent}·E on two consecutive sheets
            let stripped = |at: CoverPoint| -> C {
                let v = s.basis.values(at).unwrap();
                (c[0] * v[0] + c[1] * v[1]) * (-g * at.log()).exp()
            };
            for (rho, phi) in [(0.5, 1.0), (1.0, -0.3), (2.0, 2.2)] {
                let at = CoverPoint::new(rho, phi);
                let k = if s.eig.lambda(plus).norm() >= 1.0 { 1 } else { -1 };
                assert!(rel(stripped(at.shifted(k)), stripped(at)) < 1e-8);
            }
        }
    }
}

#[test]
fn series_satisfies_the_equation_pointwise() {
    let p = param_sets()[1];
    let s = setup(p);
    let l = p.order() as f64;
    for plus in [true, false] {
        let ls = series(&s, plus);
        for at in [CoverPoint::new(0.7, 0.2), CoverPoint::new(1.4, -2.8)] {
            let (d1, d2) = contour_derivatives(|q| eval_series(&ls, q), at, 0.05, 64);
            let z = at.project();
            let e = eval_series(&ls, at);
            let res = z * z * d2 + ((l + 1.0) * z + p.mu * (1.0 - z * z)) * d1 + (-p.mu * (l + 1.0) * z + p.lambda) * e;
            let scale = (z * z * d2).norm() + d1.norm() + e.norm();
            assert!(res.norm() < 1e-9 * scale, "{}", res.norm() / scale);
            assert!(rel(eval_series_deriv(&ls, at), d1) < 1e-9);
        }
    }
}

#[test]
fn eigenvalues_agree_with_direct_computation() {
    for p in param_sets() {
        let s = setup(p);
        let md = MonodromyData::new(&s.basis).unwrap();
        assert!(s.eig.direct_deviation < 1e-10);
        assert!((s.eig.lambda_plus * s.eig.lambda_minus - 1.0).norm() < 1e-10);
        assert!(s.eig.eigen_residual(&md.m) < 1e-8 * s.eig.combo_plus[0].norm().max(1.0));
        // Λ = e^{−2πiγ}
        for plus in [true, false] {
            let g = if plus { s.eig.gamma_plus } else { s.eig.gamma_minus };
            assert!(rel((C::new(0.0, -2.0 * PI) * g).exp(), s.eig.lambda(plus)) < 1e-12);
        }
    }
}

#[test]
fn other_root_branch_swaps_the_labels() {
    let s = setup(param_sets()[0]);
    let md = MonodromyData::new(&s.basis).unwrap();
    let swapped = monodromy_eigen_with_branches(&md.m, &md.boundary, true, false).unwrap();
    assert!(rel(swapped.lambda_plus, s.eig.lambda_minus) < 1e-10);
    assert!(rel(swapped.lambda_minus, s.eig.lambda_plus) < 1e-10);
    let both = monodromy_eigen_with_branches(&md.m, &md.boundary, true, true).unwrap();
    assert!(rel(both.lambda_plus, s.eig.lambda_plus) < 1e-10);
}

#[test]
fn shifted_exponent_has_no_decaying_series() {
    for p in param_sets() {
        let s = setup(p);
        for plus in [true, false] {
            let anchor = s.eig.anchor(plus, &s.basis.cauchy());
            let r = build_series(&p, s.eig.exponent(plus) + 0.1, &anchor, MIN_N);
            assert!(matches!(r, Err(Error::NoDecay(_))), "{r:?}");
            let forced = build_series_with(
                &p,
                s.eig.exponent(plus) + 0.1,
                &anchor,
                MIN_N,
                &SeriesOptions { cap: 256, force: true, ..Default::default() },
            )
            .unwrap();
            assert!(forced.residual > 1e-12 || forced.anchor_mismatch > 1e-7);
        }
    }
}

#[test]
fn anchor_must_sit_at_lifted_unit() {
    let s = setup(param_sets()[0]);
    let mut anchor = s.eig.anchor(true, &s.basis.cauchy());
    anchor.point = CoverPoint::new(1.0, 2.0 * PI);
    assert!(matches!(build_series(&param_sets()[0], s.eig.gamma_plus, &anchor, MIN_N), Err(Error::InvalidParams(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn series_agrees_with_basis(
        ell in 1u32..4, lam in 0.4f64..2.0, mu in 0.2f64..0.9, rho in 0.5f64..2.0, phi in -3.0f64..3.0,
    ) {
        let p = HeunParams::new(ell, C::new(lam, 0.0), C::new(mu, 0.0)).unwrap();
        let s = setup(p);
        let at = CoverPoint::new(rho, phi);
        let v = s.basis.values(at).unwrap();
        for plus in [true, false] {
            let c = s.eig.combo(plus);
            let ls = series(&s, plus);
            let want = c[0] * v[0] + c[1] * v[1];
            prop_assert!(rel(eval_series(&ls, at), want) < 1e-8);
        }
    }
}
