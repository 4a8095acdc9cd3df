use std::f64::consts::PI;

use proptest::prelude::*;
use slipstroke::kinematics::{
    apparent_speed, derive_geometry, indentation_at, local_speed, speed_summary, speed_table,
    study_angular_velocities, ActuationParams, TactorGeometry, STUDY_DELAY_FRACTIONS,
};

fn geometry() -> impl Strategy<Value = TactorGeometry> {
    (0.5f64..10.0, 2.0f64..20.0, 0.05f64..0.9).prop_map(|(rs, rl, frac)| {
        derive_geometry(rs, rl, rl * frac).expect("generated geometry is valid")
    })
}

proptest! {
    #[test]
    fn indentation_is_even_and_bounded(g in geometry(), a in -4.0f64..4.0) {
        let i = indentation_at(&g, a);
        prop_assert_eq!(i, indentation_at(&g, -a));
        prop_assert!((0.0..=g.max_indentation()).contains(&i));
    }

    #[test]
    fn indentation_is_continuous_at_exit(g in geometry(), eps in 1e-9f64..1e-6) {
        let inside = indentation_at(&g, g.exit_angle() - eps);
        prop_assert!(inside < 1e-4, "jump {inside}");
        prop_assert_eq!(indentation_at(&g, g.exit_angle() + eps), 0.0);
    }

    #[test]
    fn standoff_round_trips(g in geometry()) {
        let y = g.trajectory_radius() * g.exit_angle().cos();
        prop_assert!((y + g.tip_radius() - g.standoff()).abs() < 1e-9);
    }

    #[test]
    fn local_speed_is_travel_over_contact(g in geometry(), omega in 0.1f64..9.0) {
        let contact = 2.0 * g.exit_angle() / omega;
        let v = local_speed(&g, omega).unwrap();
        prop_assert!((g.skin_travel() / contact - v).abs() < 1e-9);
    }

    #[test]
    fn single_tactor_apparent_equals_local(g in geometry(), omega in 0.1f64..9.0, d in 0.0f64..1.0) {
        let p = ActuationParams::new(omega, d, 1, 20.0).unwrap();
        let s = speed_summary(&g, &p);
        prop_assert!((s.apparent_speed - s.local_speed).abs() < 1e-9 * s.local_speed);
    }

    #[test]
    fn apparent_exceeds_local_iff_spacing_outruns_delay(
        g in geometry(),
        omega in 0.1f64..9.0,
        d in 0.0f64..0.5,
        n in 2usize..8,
        spacing in 0.0f64..50.0,
    ) {
        let p = ActuationParams::new(omega, d, n, spacing).unwrap();
        let local = local_speed(&g, omega).unwrap();
        let margin = spacing * g.exit_angle() / PI - g.skin_travel() * d;
        prop_assume!(margin.abs() > 1e-9);
        prop_assert_eq!(apparent_speed(&g, &p) > local, margin > 0.0);
    }
}

#[test]
fn grid_is_monotone() {
    let g = TactorGeometry::default();
    let omegas = study_angular_velocities();
    for spacing in [20.0, 30.0, 35.0, 40.0] {
        let cells = speed_table(&g, &omegas, &STUDY_DELAY_FRACTIONS, 5, spacing).unwrap();
        let v = |wi: usize, di: usize| cells[di * omegas.len() + wi].summary.apparent_speed;
        for di in 0..STUDY_DELAY_FRACTIONS.len() {
            for wi in 0..omegas.len() {
                // omegas run fastest first; delays increase.
                if wi + 1 < omegas.len() {
                    assert!(v(wi, di) > v(wi + 1, di));
                }
                if di + 1 < STUDY_DELAY_FRACTIONS.len() {
                    assert!(v(wi, di) > v(wi, di + 1));
                }
                let local = local_speed(&g, omegas[wi].value()).unwrap();
                assert!(v(wi, di) > local);
            }
        }
    }
    let narrow = speed_table(&g, &omegas, &[0.1], 5, 20.0).unwrap();
    let wide = speed_table(&g, &omegas, &[0.1], 5, 40.0).unwrap();
    for (a, b) in narrow.iter().zip(&wide) {
        assert!(b.summary.apparent_speed > a.summary.apparent_speed);
    }
}
