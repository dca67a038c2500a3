use std::f64::consts::PI;

use formation::analysis::{residual_fbar, residual_fbar_bound};
use formation::controller::{spow, ControllerParams};
use formation::graph::{adjacency_weight, build_adjacency, laplacian, spectral_summary, CommModel};
use formation::vehicle::{
    input_matrix, input_matrix_inverse, step, wrap_angle, AgentState, ControlInput, VelocityBounds,
};
use formation::Vec2;
use nalgebra::{DVector, Matrix2};
use proptest::prelude::*;

fn positions(max: usize) -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec((-300.0..300.0f64, -300.0..300.0f64), 2..=max)
        .prop_map(|v| v.into_iter().map(|(x, y)| Vec2::new(x, y)).collect())
}

proptest! {
    #[test]
    fn adjacency_weight_is_non_increasing(r1 in 0.0..400.0f64, r2 in 0.0..400.0f64, range in 1.0..400.0f64, sigma in 0.1..20.0f64) {
        let comm = CommModel::new(range, sigma).unwrap();
        let (near, far) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let (a, b) = (adjacency_weight(near, &comm).unwrap(), adjacency_weight(far, &comm).unwrap());
        prop_assert!(a >= b);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn laplacian_rows_sum_to_zero_and_spectrum_is_psd(pos in positions(8)) {
        let comm = CommModel::new(300.0, 10.0).unwrap();
        let adj = build_adjacency(&pos, &comm).unwrap();
        for i in 0..adj.order() {
            for j in 0..adj.order() {
                prop_assert_eq!(adj.weight(i, j), adj.weight(j, i));
            }
        }
        let lap = laplacian(&adj);
        prop_assert!(lap.max_row_sum() < 1e-12);
        let s = spectral_summary(&lap).unwrap();
        prop_assert!(s.eigenvalues[0].abs() < 1e-9);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let v = DVector::from_vec(s.fiedler_vector.clone());
        let residual = lap.matrix() * &v - &v * s.fiedler_value;
        prop_assert!(residual.norm() < 1e-8 * (1.0 + lap.matrix().norm()));
    }

    #[test]
    fn input_matrix_inverse_is_exact(v in 5.0..25.0f64, phi in -PI..PI) {
        let s = AgentState::new(0.0, 0.0, v, phi);
        let prod = input_matrix(&s) * input_matrix_inverse(&s, 5.0).unwrap();
        prop_assert!((prod - Matrix2::identity()).norm() < 1e-12);
    }

    #[test]
    fn step_respects_bounds_and_wraps(v in 5.0..25.0f64, phi in -PI..PI, a in -50.0..50.0f64, w in -5.0..5.0f64, dt in 0.001..0.2f64) {
        let bounds = VelocityBounds::new(5.0, 25.0).unwrap();
        let next = step(&AgentState::new(1.0, 2.0, v, phi), &ControlInput::new(a, w), dt, &bounds).unwrap();
        prop_assert!(next.speed >= 5.0 && next.speed <= 25.0);
        prop_assert!(next.heading > -PI && next.heading <= PI);
    }

    #[test]
    fn wrap_angle_preserves_direction(angle in -100.0..100.0f64) {
        let w = wrap_angle(angle);
        prop_assert!(w > -PI && w <= PI);
        prop_assert!((w.sin() - angle.sin()).abs() < 1e-9 && (w.cos() - angle.cos()).abs() < 1e-9);
    }

    #[test]
    fn spow_is_odd_with_matching_magnitude(x in -100.0..100.0f64, y in -100.0..100.0f64, alpha in 0.05..2.0f64) {
        let v = Vec2::new(x, y);
        prop_assert_eq!(spow(-v, alpha), -spow(v, alpha));
        prop_assert_eq!(spow(v, 1.0), v);
        let s = spow(v, alpha);
        prop_assert!((s.x.abs() - x.abs().powf(alpha)).abs() <= 1e-12 * (1.0 + s.x.abs()));
    }

    #[test]
    fn derived_powers_stay_in_unit_interval(tau in -0.499..0.0f64) {
        let p = ControllerParams::new(1.0, 1.0, tau).unwrap();
        prop_assert!(p.alpha1() > 0.0 && p.alpha1() <= 1.0);
        prop_assert!(p.alpha2() > 0.0 && p.alpha2() <= 1.0);
        prop_assert_eq!(p.alpha1(), 1.0 + 2.0 * tau);
    }

    #[test]
    fn residual_fbar_respects_bound(r in 1e-4..1e4f64, alpha in 0.01..0.99f64) {
        prop_assert!(residual_fbar(r, alpha).unwrap() <= residual_fbar_bound(alpha) + 1e-12);
    }
}
