mod common;

use std::f64::consts::PI;

use common::*;
use heunsym::josephson::*;
use heunsym::monodromy::MonodromyData;
use heunsym::{Complex64 as C, CoverPoint, EigenBasis, HeunParams};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn integer_case(ell: u32) -> (HeunParams, JosephsonParams) {
    let hp = params(ell, c(1.0, 0.0), c(0.5, 0.0));
    (hp, heun_to_params(&hp).unwrap())
}

fn non_integer_case() -> JosephsonParams {
    JosephsonParams::new(1.0, 0.3, 1.1).unwrap()
}

fn phase_dist(a: f64, b: f64) -> f64 {
    (C::from_polar(1.0, a) - C::from_polar(1.0, b)).norm()
}

#[test]
fn oracle_is_converged() {
    let jp = non_integer_case();
    let times: Vec<f64> = (-30..=30).map(|k| k as f64 * jp.period() / 20.0).collect();
    let a = rk4_states(&jp, 0.4, &times, jp.period() / 4000.0);
    let b = rk4_states(&jp, 0.4, &times, jp.period() / 8000.0);
    for (x, y) in a.iter().zip(&b) {
        assert!((x.0 - y.0).abs() < 1e-8 && (x.1 - y.1).abs() < 1e-8);
    }
}

#[test]
fn trajectory_matches_oracle() {
    for jp in [integer_case(1).1, non_integer_case()] {
        let traj = integrate_period(&jp, 0.7, 40, TOL).unwrap();
        let want = phase_oracle(&jp, 0.7, &traj.t_grid);
        for k in 0..traj.len() {
            assert!((traj.phi[k] - want[k].0).abs() < 1e-8);
            assert!((traj.p[k] - want[k].1).abs() < 1e-8);
        }
    }
}

#[test]
fn forward_map_reproduces_circle_solution() {
    for ell in [1, 2] {
        let (hp, jp) = integer_case(ell);
        let basis = EigenBasis::new(hp, TOL).unwrap();
        for phi0 in [-1.1, 0.2, 0.7, 2.4] {
            let alpha = alpha_for_phi0(phi0);
            let times: Vec<f64> = (-20..=20).map(|k| k as f64 * jp.period() / 41.0).collect();
            let want = phase_oracle(&jp, phi0, &times);
            for (t, w) in times.iter().zip(&want) {
                let got = phi_from_basis(alpha, &basis, CoverPoint::new(1.0, jp.omega * t)).unwrap();
                assert!((got - C::from_polar(1.0, w.0)).norm() < 1e-7, "ell {ell} phi0 {phi0} t {t}");
                let ep = ep_from_basis(alpha, &basis, CoverPoint::new(1.0, jp.omega * t)).unwrap();
                assert!((ep - w.1.exp()).norm() < 1e-7 * w.1.exp().max(1.0));
            }
        }
    }
}

#[test]
fn inverse_map_recovers_basis() {
    for ell in [1, 3] {
        let (hp, jp) = integer_case(ell);
        let basis = EigenBasis::new(hp, TOL).unwrap();
        let phi0 = 0.45;
        let traj = integrate_period(&jp, phi0, 32, TOL).unwrap();
        let unit = basis_at_unit(phi0);
        for forward in [true, false] {
            let samples = trajectory_samples(&traj, forward).unwrap();
            let got = basis_from_phi(ell as f64, hp.mu, &samples).unwrap();
            for (s, g) in samples.iter().zip(&got) {
                let want = basis.values(s.at).unwrap();
                for i in 0..2 {
                    assert!((g[i] - unit[i] * want[i]).norm() < 1e-7 * want[i].norm().max(1.0), "{} {i}", s.at);
                }
            }
        }
    }
}

#[test]
fn alpha_sweep_round_trips_through_values() {
    let (hp, jp) = integer_case(2);
    let basis = EigenBasis::new(hp, TOL).unwrap();
    for alpha in [0.3, PI / 2.0, 1.9, 2.8] {
        let phi0 = alpha - PI / 2.0;
        let at = CoverPoint::new(1.0, jp.omega * 2.3);
        let want = phase_oracle(&jp, phi0, &[2.3])[0];
        let got = phi_from_basis(alpha, &basis, at).unwrap();
        assert!(phase_dist(got.arg(), want.0) < 1e-7);
        assert!((got.norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn holomorphic_phase_obeys_riccati_off_the_circle() {
    let (hp, _) = integer_case(2);
    let basis = EigenBasis::new(hp, TOL).unwrap();
    let model = PhaseModel::from_heun(&hp);
    let ph = BasisPhase { basis: &basis, alpha: 1.1 };
    let tc = theta_c_phase(BasisPhase { basis: &basis, alpha: 1.1 });
    for at in [CoverPoint::new(0.7, 0.4), CoverPoint::new(1.3, -2.0), CoverPoint::new(1.1, 7.0)] {
        let z = at.project();
        for f in [&ph as &dyn PhaseFunction, &tc] {
            let (phi, dphi) = f.phi_jet(at).unwrap();
            let (ep, dep) = f.ep_jet(at).unwrap();
            assert!(model.riccati_residual(z, phi, dphi) < 1e-10);
            assert!(model.ep_residual(z, phi, ep, dep) < 1e-10);
            // the jets are the actual derivatives
            let (d1, _) = contour_derivatives(|q| f.phi(q).unwrap(), at, 0.02, 48);
            assert!(rel(d1, dphi) < 1e-9);
            let (e1, _) = contour_derivatives(|q| f.ep(q).unwrap(), at, 0.02, 48);
            assert!(rel(e1, dep) < 1e-9);
        }
    }
}

#[test]
fn extension_matches_oracle_over_three_periods() {
    for jp in [integer_case(1).1, non_integer_case()] {
        let traj = integrate_period(&jp, 0.2, 48, TOL).unwrap();
        let ext = extend_phase(&traj).unwrap();
        let et = &ext.trajectory;
        assert!(et.t_grid[0] < -1.4 * jp.period() && et.t_grid[et.len() - 1] > 1.4 * jp.period());
        let want = phase_oracle(&jp, 0.2, &et.t_grid);
        for k in 0..et.len() {
            assert!(phase_dist(et.phi[k], want[k].0) < 1e-7, "t {}", et.t_grid[k]);
            assert!((et.p[k] - want[k].1).abs() < 1e-7);
        }
    }
}

#[test]
fn phase_side_monodromy_matches_heun_side() {
    for ell in [1, 2, 3] {
        let (hp, jp) = integer_case(ell);
        let mh = MonodromyData::new(&EigenBasis::new(hp, TOL).unwrap()).unwrap().m;
        for phi0 in [0.3, -0.8] {
            let traj = integrate_period(&jp, phi0, 16, TOL).unwrap();
            let mj = phase_monodromy_matrix(&traj).unwrap();
            assert!((mj.det() - 1.0).norm() < 1e-8);
            assert!(to_unit_frame(&mj, phi0).unwrap().rel_diff(&mh) < 1e-7, "ell {ell}");
        }
    }
    let traj = integrate_period(&non_integer_case(), 0.3, 16, TOL).unwrap();
    assert!(matches!(phase_monodromy_matrix(&traj), Err(heunsym::Error::NonIntegerOrder(_))));
}

/// Ten grid indices spread over the period.
fn circle_samples(n: usize) -> Vec<usize> {
    (0..10).map(|j| j * (n - 1) / 9).collect()
}

#[test]
fn theta_a_map_is_an_involution_onto_solutions() {
    let (_, jp) = integer_case(1);
    let traj = integrate_period(&jp, 0.6, 40, TOL).unwrap();
    let once = theta_ab_iterate(ThetaAB::A, &traj, 1).unwrap();
    // the image solves the equation
    let want = phase_oracle(&jp, once.phi0, &once.t_grid);
    for k in circle_samples(once.len()) {
        assert!(phase_dist(once.phi[k], want[k].0) < 1e-6);
    }
    let twice = theta_ab_iterate(ThetaAB::A, &traj, 2).unwrap();
    for k in circle_samples(traj.len()) {
        assert!(phase_dist(twice.phi[k], traj.phi[k]) < 1e-6, "t {}", traj.t_grid[k]);
        assert!((twice.p[k] - traj.p[k]).abs() < 1e-6);
    }
}

#[test]
fn theta_b_map_squared_is_the_period_shift() {
    for ell in [1, 2] {
        let (_, jp) = integer_case(ell);
        let phi0 = 0.6;
        let traj = integrate_period(&jp, phi0, 40, TOL).unwrap();
        let twice = theta_ab_iterate(ThetaAB::B, &traj, 2).unwrap();
        let shifted: Vec<f64> = traj.t_grid.iter().map(|t| t + jp.period()).collect();
        let want = phase_oracle(&jp, phi0, &shifted);
        let p_at_t = phase_oracle(&jp, phi0, &[jp.period()])[0].1;
        for k in circle_samples(traj.len()) {
            assert!(phase_dist(twice.phi[k], want[k].0) < 1e-6, "ell {ell} t {}", traj.t_grid[k]);
            // 𝓔 is renormalized to 1 at the new origin
            assert!((twice.p[k] - (want[k].1 - p_at_t)).abs() < 1e-6);
        }
    }
}

#[test]
fn theta_c_map_is_an_exact_involution() {
    for jp in [integer_case(2).1, non_integer_case()] {
        let traj = integrate_period(&jp, 1.3, 24, TOL).unwrap();
        let once = theta_c_trajectory(&traj).unwrap();
        let want = phase_oracle(&jp, once.phi0, &once.t_grid);
        for k in 0..once.len() {
            assert!(phase_dist(once.phi[k], want[k].0) < 1e-7);
        }
        let twice = theta_c_trajectory(&once).unwrap();
        // reflection about π twice: only the rounding of the subtraction remains
        for k in 0..traj.len() {
            assert!((twice.phi[k] - traj.phi[k]).abs() <= 4.0 * f64::EPSILON * (PI + traj.phi[k].abs()));
        }
        assert_eq!(twice.p, traj.p);
        assert_eq!(twice.t_grid, traj.t_grid);
    }
}

#[test]
fn real_model_matches_heun_model() {
    let (hp, jp) = integer_case(3);
    let a = jp.model();
    let b = PhaseModel::from_heun(&hp);
    assert!((a.l - b.l).abs() < 1e-14);
    assert!((a.mu - b.mu).norm() < 1e-14 && (a.omega - b.omega).norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parameter_maps_round_trip(ell in 1u32..8, a in 0.05f64..3.0, omega in 0.1f64..4.0) {
        let jp = JosephsonParams::new(a, -(ell as f64) * omega, omega).unwrap();
        let hp = params_to_heun(&jp).unwrap().require().unwrap();
        prop_assert_eq!(hp.ell, ell);
        let back = heun_to_params(&hp).unwrap();
        prop_assert!((back.a - jp.a).abs() < 1e-12 * jp.a.max(1.0));
        prop_assert!((back.b - jp.b).abs() < 1e-12 * jp.b.abs().max(1.0));
        prop_assert!((back.omega - jp.omega).abs() < 1e-12 * jp.omega.max(1.0));
    }

    #[test]
    fn non_integer_order_is_reported(a in 0.1f64..2.0, b in 0.05f64..0.95, omega in 0.5f64..2.0) {
        // B/ω in (0, 1) is never a negative integer
        let jp = JosephsonParams::new(a, b * omega, omega).unwrap();
        let m = params_to_heun(&jp).unwrap();
        prop_assert!(m.non_integer_order());
        prop_assert!(m.require().is_err());
    }
}
