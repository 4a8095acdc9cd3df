use std::f64::consts::{FRAC_PI_2, PI};

use slipstroke::kinematics::{
    study_angular_velocities, ActuationParams, TactorGeometry, STUDY_DELAY_FRACTIONS,
};
use slipstroke::scheduler::{
    build_schedule, build_schedule_with, contact_profile, ScheduleOptions, DEFAULT_TICK_RATE,
};

#[test]
fn later_motors_are_time_shifted_copies() {
    let g = TactorGeometry::default();
    for w in study_angular_velocities() {
        for &d in &[0.0, 0.1, 0.25] {
            let p = ActuationParams::new(w.value(), d, 4, 20.0).unwrap();
            let s = build_schedule(&g, &p, DEFAULT_TICK_RATE).unwrap();
            let onsets = s.onset_ticks().to_vec();
            for motor in 1..4 {
                let shift = (onsets[motor] - onsets[0]) as usize;
                for k in (0..s.sample_count() - shift).step_by(97) {
                    assert_eq!(
                        s.angle(motor, k + shift).to_bits(),
                        s.angle(0, k).to_bits(),
                        "{w} d={d} motor {motor} tick {k}"
                    );
                }
            }
        }
    }
}

#[test]
fn rotation_spans_one_revolution() {
    let g = TactorGeometry::default();
    let p = ActuationParams::new(PI, 0.1, 5, 20.0).unwrap();
    let s = build_schedule(&g, &p, DEFAULT_TICK_RATE).unwrap();
    assert_eq!(s.angle(0, 0), -FRAC_PI_2);
    assert_eq!(s.angle(4, s.sample_count() - 1), 3.0 * FRAC_PI_2);
    let bare = build_schedule_with(&g, &p, ScheduleOptions::default().without_holds()).unwrap();
    assert_eq!(bare.time(0), 0.0);
    assert!(bare.sample_count() < s.sample_count());
}

#[test]
fn overlap_matches_brute_force_on_every_study_condition() {
    let g = TactorGeometry::default();
    for &d in &STUDY_DELAY_FRACTIONS {
        for w in study_angular_velocities() {
            let p = ActuationParams::new(w.value(), d, 5, 20.0).unwrap();
            let s = build_schedule(&g, &p, DEFAULT_TICK_RATE).unwrap();
            let profile = contact_profile(&s, &g);
            let brute = profile
                .events
                .windows(2)
                .any(|pair| pair[1].contact_start < pair[0].contact_end);
            assert_eq!(profile.overlapping, brute, "{w} d={d}");
            for e in &profile.events {
                let peak = e.indentation.iter().map(|x| x.1).fold(0.0, f64::max);
                assert!(peak > 1.4 && peak <= 1.5, "peak {peak}");
                assert!((e.duration() - 2.0 * g.exit_angle() / w.value()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn single_tactor_never_overlaps() {
    let g = TactorGeometry::default();
    let p = ActuationParams::new(PI, 0.0, 1, 20.0).unwrap();
    let s = build_schedule(&g, &p, DEFAULT_TICK_RATE).unwrap();
    assert!(!contact_profile(&s, &g).overlapping);
}
