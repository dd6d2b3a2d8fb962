use num_complex::Complex64;
use proptest::prelude::*;
use qubit_manifolds::audit::quadratic_fit_residual;
use qubit_manifolds::dynamics::{
    evolve_classical, h0_value, hamilton_rhs, quantum_propagator_step, second_order_acceleration,
};
use qubit_manifolds::geometry::{
    christoffel_from_metric, dissipative_ode_residual, geodesic_integrate, Chart, Component,
    GeodesicState, LeviCivita, MetricComponents, Signature,
};
use qubit_manifolds::parallel;
use qubit_manifolds::state_maps::{from_action_angle, hopf_map, to_action_angle, wrap_angle};
use qubit_manifolds::{ActionAnglePoint, FieldParams};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn warped_metric(a: f64, b: f64) -> MetricComponents {
    MetricComponents::new(
        Chart::ActionAngle,
        Component::real(move |x| 1.0 + a * x * x).with_d1(move |x| c(2.0 * a * x)),
        Component::real(move |x| b * x).with_d1(move |_| c(b)),
        Component::real(move |x| 2.0 + x.sin()).with_d1(move |x| c(x.cos())),
        Signature::Riemannian,
    )
}

fn action() -> impl Strategy<Value = f64> {
    prop_oneof![-0.95..-0.05f64, 0.05..0.95f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_angle_round_trip(i in -0.999..0.999f64, phi in -3.1..3.1f64) {
        let p = ActionAnglePoint::new(i, phi).unwrap();
        let q = to_action_angle(&from_action_angle(&p).unwrap()).unwrap();
        prop_assert!((q.action - i).abs() < 1e-12);
        prop_assert!(wrap_angle(q.angle - phi).abs() < 1e-12);
    }

    #[test]
    fn bloch_vector_is_unit(i in -0.999..0.999f64, phi in -10.0..10.0f64) {
        let b = hopf_map(&from_action_angle(&ActionAnglePoint { action: i, angle: phi }).unwrap()).unwrap();
        prop_assert!((b.norm() - 1.0).abs() < 1e-12);
        prop_assert!((b.z - i).abs() < 1e-12);
    }

    #[test]
    fn exact_step_preserves_norm(
        i in -0.9..0.9f64, phi in -3.0..3.0f64,
        ax in -2.0..2.0f64, ay in -2.0..2.0f64, az in -2.0..2.0f64, dt in 1e-4..1.0f64,
    ) {
        let mut s = from_action_angle(&ActionAnglePoint { action: i, angle: phi }).unwrap();
        let a = FieldParams::new(ax, ay, az);
        for _ in 0..100 {
            s = quantum_propagator_step(&s, &a, dt);
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamilton_flow_conserves_energy(i in action(), phi in -3.0..3.0f64, ax in -1.0..1.0f64, az in -1.0..1.0f64) {
        let a = FieldParams::new(ax, 0.5, az);
        let p0 = ActionAnglePoint::new(i, phi).unwrap();
        let tr = evolve_classical(&p0, &a, 1e-2, 1.0).unwrap();
        let h0 = h0_value(&p0, &a).unwrap();
        let end = h0_value(&tr.last_point().unwrap(), &a).unwrap();
        prop_assert!((end - h0).abs() < 1e-8 * h0.abs().max(1.0));
    }

    #[test]
    fn geodesic_time_reversal(a in 0.0..1.0f64, b in -0.3..0.3f64, x in -0.5..0.5f64, v1 in -0.5..0.5f64, v2 in -0.5..0.5f64) {
        let conn = LeviCivita(warped_metric(a, b));
        let fwd = geodesic_integrate(&conn, GeodesicState::new([x, 0.0], [v1, v2]), 0.1, 1.0).unwrap();
        let k = fwd.len() - 1;
        let p = fwd.positions[k];
        let v = fwd.velocity(k).unwrap();
        let back = geodesic_integrate(&conn, GeodesicState::new(p, [-v[0], -v[1]]), 0.1, 1.0).unwrap();
        let end = back.positions[back.len() - 1];
        prop_assert!((end[0] - x).abs() < 1e-8 && end[1].abs() < 1e-8, "{end:?}");
    }

    #[test]
    fn christoffel_analytic_matches_finite_difference(a in 0.0..1.0f64, b in -0.3..0.3f64, x in -0.8..0.8f64) {
        let m = warped_metric(a, b);
        let exact = christoffel_from_metric(&m, x).unwrap().as_array();
        let fd = christoffel_from_metric(&m.numeric_only(), x).unwrap().as_array();
        for (e, f) in exact.iter().zip(&fd) {
            prop_assert!((e - f).norm() < 1e-7, "{e} vs {f}");
        }
    }

    #[test]
    fn transverse_flow_is_velocity_quadratic(i in action()) {
        let r = quadratic_fit_residual(|v| second_order_acceleration(i, v, 0.0), 64).unwrap();
        prop_assert!(r < 1e-10);
    }

    #[test]
    fn dissipative_residual_is_linear_in_friction(i in action(), g in 0.0..0.5f64) {
        let base = dissipative_ode_residual(0.0, i).unwrap();
        let r = dissipative_ode_residual(g, i).unwrap();
        let expect = g * (i * i + 1.0) / (i * (i * i - 1.0));
        prop_assert!((r - base - c(expect)).norm() < 1e-9 * (1.0 + expect.abs()));
    }

    #[test]
    fn parallel_map_keeps_order(xs in prop::collection::vec(action(), 1..64)) {
        let a = FieldParams::new(0.3, 0.4, 0.2);
        let f = |&i: &f64| hamilton_rhs(&ActionAnglePoint { action: i, angle: 0.1 }, &a).unwrap();
        prop_assert_eq!(parallel::map(&xs, f), parallel::map_sequential(&xs, f));
    }
}
