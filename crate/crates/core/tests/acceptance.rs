//! Acceptance checks. Runs without the libtest harness so every criterion prints one line.

use std::f64::consts::{PI, TAU};
use std::panic;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slipstroke::kinematics::{
    cm_per_s_1dp, indentation_at, local_speed, speed_table, study_angular_velocities,
    ActuationParams, AngularVelocity, SpeedCell, TactorGeometry, STUDY_DELAY_FRACTIONS,
};
use slipstroke::motorsim::{simulate_motor, MotorModel, PidGains};
use slipstroke::scheduler::{build_schedule, contact_profile, DEFAULT_TICK_RATE};
use slipstroke::study::stats::{bonferroni, welch_t};
use slipstroke::study::{
    generate_study1_plan, generate_study2_plan, one_sample_t, Location, StudyId,
};

const SPEED_TOL_CM_S: f64 = 0.05;
const TRAVEL_TOL_CM: f64 = 0.01;
const TRACKING_MAX_ERROR: f64 = 0.05;
const ORACLE_TOL: f64 = 1e-6;

fn omega(num: u32, den: u32) -> AngularVelocity {
    AngularVelocity::pi_fraction(num, den)
}

fn cell(cells: &[SpeedCell], w: AngularVelocity, d: f64) -> f64 {
    let c = cells
        .iter()
        .find(|c| c.angular_velocity == w && (c.delay_fraction - d).abs() < 1e-12)
        .expect("cell present");
    c.summary.apparent_speed / 10.0
}

fn rounded_extremes(cells: &[SpeedCell]) -> (f64, f64) {
    let speeds = cells.iter().map(|c| cm_per_s_1dp(c.summary.apparent_speed));
    let min = speeds.clone().fold(f64::INFINITY, f64::min);
    let max = speeds.fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

fn close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: got {actual}, expected {expected} ± {tol}"
    );
}

fn criterion_1() -> String {
    let start = Instant::now();
    let g = TactorGeometry::default();
    let cells = speed_table(
        &g,
        &study_angular_velocities(),
        &STUDY_DELAY_FRACTIONS,
        5,
        20.0,
    )
    .unwrap();
    assert_eq!(cells.len(), 30);
    let min = cells
        .iter()
        .min_by(|a, b| {
            a.summary
                .apparent_speed
                .total_cmp(&b.summary.apparent_speed)
        })
        .unwrap();
    let max = cells
        .iter()
        .max_by(|a, b| {
            a.summary
                .apparent_speed
                .total_cmp(&b.summary.apparent_speed)
        })
        .unwrap();
    assert_eq!(
        (min.angular_velocity, min.delay_fraction),
        (omega(2, 3), 0.25)
    );
    assert_eq!(
        (max.angular_velocity, max.delay_fraction),
        (omega(2, 1), 0.0)
    );
    assert_eq!(rounded_extremes(&cells), (2.5, 48.2));
    for (w, d, expected) in [
        (omega(1, 1), 0.10, 7.7),
        (omega(1, 1), 0.15, 5.7),
        (omega(2, 3), 0.05, 7.8),
        (omega(2, 3), 0.10, 5.1),
    ] {
        close(
            cell(&cells, w, d),
            expected,
            SPEED_TOL_CM_S,
            &format!("{w} d={d}"),
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    format!("min 2.5 max 48.2 cm/s, spot cells within ±{SPEED_TOL_CM_S} ({elapsed:?})")
}

fn criterion_2() -> String {
    let g = TactorGeometry::default();
    let expected = [5.3, 3.6, 2.7, 2.1, 1.8];
    let mut got = Vec::new();
    for (w, e) in study_angular_velocities().into_iter().zip(expected) {
        let v = local_speed(&g, w.value()).unwrap() / 10.0;
        close(v, e, SPEED_TOL_CM_S, &format!("local speed at {w}"));
        got.push(format!("{v:.3}"));
    }
    format!("local speeds {} cm/s", got.join(", "))
}

fn criterion_3() -> String {
    let g = TactorGeometry::default();
    let mut cells = Vec::new();
    for spacing in [20.0, 30.0, 35.0, 40.0] {
        cells.extend(speed_table(&g, &study_angular_velocities(), &[0.10], 4, spacing).unwrap());
    }
    let speeds: Vec<f64> = cells
        .iter()
        .map(|c| c.summary.apparent_speed / 10.0)
        .collect();
    let min = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    close(min, 4.8, SPEED_TOL_CM_S, "minimum");
    close(max, 26.7, SPEED_TOL_CM_S, "maximum");
    format!("min {min:.3} max {max:.3} cm/s over 20 cells")
}

fn criterion_4() -> String {
    let g = TactorGeometry::default();
    let travel_cm = g.skin_travel() / 10.0;
    close(travel_cm, 0.995, TRAVEL_TOL_CM, "skin travel");
    assert_eq!(indentation_at(&g, 0.0), 1.5);
    assert_eq!(indentation_at(&g, g.exit_angle()), 0.0);
    assert_eq!(indentation_at(&g, -g.exit_angle()), 0.0);
    format!("2x = {travel_cm:.4} cm, I(0) = 1.5 mm, I(±θ) = 0")
}

fn criterion_5() -> String {
    let start = Instant::now();
    let g = TactorGeometry::default();
    let threshold = g.exit_angle() / PI;
    let mut overlapping = 0;
    for &d in &STUDY_DELAY_FRACTIONS {
        for w in study_angular_velocities() {
            let params = ActuationParams::new(w.value(), d, 5, 20.0).unwrap();
            let schedule = build_schedule(&g, &params, DEFAULT_TICK_RATE).unwrap();
            let profile = contact_profile(&schedule, &g);
            // Oracle: contact intervals from the sampled indentation, intersected pairwise.
            let intervals: Vec<(f64, f64)> = profile
                .events
                .iter()
                .map(|e| {
                    let touching: Vec<f64> = e
                        .indentation
                        .iter()
                        .filter(|(_, i)| *i > 0.0)
                        .map(|(t, _)| *t)
                        .collect();
                    (touching[0], *touching.last().unwrap())
                })
                .collect();
            let mut brute = false;
            for i in 0..intervals.len() {
                for j in i + 1..intervals.len() {
                    let (a, b) = (intervals[i], intervals[j]);
                    brute |= a.0 <= b.1 && b.0 <= a.1;
                }
            }
            assert_eq!(profile.overlapping, brute, "{w} d={d}");
            assert_eq!(brute, d < threshold, "{w} d={d}");
            overlapping += brute as usize;
        }
    }
    let at = |d: f64| {
        let params = ActuationParams::new(TAU, d, 5, 20.0).unwrap();
        let s = build_schedule(&g, &params, DEFAULT_TICK_RATE).unwrap();
        contact_profile(&s, &g).overlapping
    };
    assert!(at(0.10));
    assert!(!at(0.25));
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    format!("threshold {threshold:.4}, {overlapping}/30 overlapping, oracle agrees ({elapsed:?})")
}

fn criterion_6() -> String {
    let start = Instant::now();
    let g = TactorGeometry::default();
    let model = MotorModel::default();
    let gains = PidGains::default();
    let mut worst: f64 = 0.0;
    for &d in &STUDY_DELAY_FRACTIONS {
        for w in study_angular_velocities() {
            let params = ActuationParams::new(w.value(), d, 5, 20.0).unwrap();
            let schedule = build_schedule(&g, &params, DEFAULT_TICK_RATE).unwrap();
            for motor in 0..5 {
                let r = simulate_motor(&model, &gains, &schedule, motor)
                    .unwrap_or_else(|e| panic!("{w} d={d} motor {motor}: {e}"));
                assert!(
                    r.summary.max_abs_error < TRACKING_MAX_ERROR,
                    "{w} d={d} motor {motor}: {}",
                    r.summary.max_abs_error
                );
                worst = worst.max(r.summary.max_abs_error);
            }
        }
    }
    let params = ActuationParams::new(TAU, 0.1, 5, 20.0).unwrap();
    let schedule = build_schedule(&g, &params, DEFAULT_TICK_RATE).unwrap();
    let a = simulate_motor(&model, &gains, &schedule, 3).unwrap();
    let b = simulate_motor(&model, &gains, &schedule, 3).unwrap();
    assert!(a
        .angle
        .iter()
        .zip(&b.angle)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(a.encoder_counts, b.encoder_counts);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    format!("150 runs, worst max error {worst:.5} rad, repeat run bit-identical ({elapsed:?})")
}

fn criterion_7() -> String {
    use std::collections::HashMap;
    for participant in 0..6 {
        let plan = generate_study1_plan(11, participant);
        assert_eq!(plan.trials.len(), 120);
        let mut tally: HashMap<(String, u64, Location), usize> = HashMap::new();
        for t in &plan.trials {
            let c = t.condition;
            let key = (
                c.angular_velocity.to_string(),
                c.delay_fraction.to_bits(),
                c.location.expect("study 1 trials carry a location"),
            );
            *tally.entry(key).or_default() += 1;
        }
        assert_eq!(tally.len(), 60);
        assert!(tally.values().all(|&n| n == 2));
    }
    let mut positions = vec![Vec::new(); 4];
    for participant in 0..4 {
        let plan = generate_study2_plan(11, participant);
        assert_eq!(plan.study, StudyId::SpacingSweep);
        assert_eq!(plan.trials.len(), 40);
        let mut order: Vec<f64> = Vec::new();
        let mut tally: HashMap<(String, u64), usize> = HashMap::new();
        for t in &plan.trials {
            let c = t.condition;
            if order.last() != Some(&c.spacing_mm) {
                order.push(c.spacing_mm);
            }
            *tally
                .entry((c.angular_velocity.to_string(), c.spacing_mm.to_bits()))
                .or_default() += 1;
        }
        assert_eq!(order.len(), 4, "spacings run in contiguous sets");
        assert!(tally.len() == 20 && tally.values().all(|&n| n == 2));
        for (pos, s) in order.into_iter().enumerate() {
            positions[pos].push(s);
        }
    }
    for column in &mut positions {
        column.sort_by(f64::total_cmp);
        assert_eq!(column, &[20.0, 30.0, 35.0, 40.0]);
    }
    "study 1: 120 trials, 60 cells × 2; study 2: 40 trials, Latin positions balanced".to_string()
}

/// Independent reference: two-sided Student t p-value by adaptive Simpson quadrature.
mod oracle {
    use std::f64::consts::PI;

    fn ln_gamma(x: f64) -> f64 {
        // Lanczos, g = 7, n = 9.
        const C: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if x < 0.5 {
            return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
        }
        let x = x - 1.0;
        let mut a = C[0];
        let t = x + 7.5;
        for (i, c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }

    fn density(x: f64, df: f64) -> f64 {
        let ln_norm = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * PI).ln();
        (ln_norm - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
    }

    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn adapt(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
            return left + right + (left + right - whole) / 15.0;
        }
        adapt(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
            + adapt(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }

    pub fn two_sided_p(t: f64, df: f64) -> f64 {
        let f = |x: f64| density(x, df);
        let b = t.abs();
        let (fa, fm, fb) = (f(0.0), f(b / 2.0), f(b));
        let whole = simpson(0.0, b, fa, fm, fb);
        let half = adapt(&f, 0.0, b, fa, fm, fb, whole, 1e-12, 50);
        (1.0 - 2.0 * half).clamp(0.0, 1.0)
    }

    pub fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (
            m,
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0),
        )
    }
}

fn criterion_8() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(3..=9);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..5.0)).collect();
        let m = rng.gen_range(3..=9);
        let shift = rng.gen_range(-3.0..3.0);
        let b: Vec<f64> = (0..m).map(|_| shift + rng.gen_range(-6.0..6.0)).collect();

        let (ma, va) = oracle::mean_var(&a);
        let t1 = ma / (va / n as f64).sqrt();
        let one = one_sample_t(&a, 0.0).unwrap();
        close(one.t, t1, 1e-9, "one-sample t");
        let p1 = oracle::two_sided_p(t1, (n - 1) as f64);
        close(one.p, p1, ORACLE_TOL, "one-sample p");

        let (mb, vb) = oracle::mean_var(&b);
        let (sa, sb) = (va / n as f64, vb / m as f64);
        let t2 = (ma - mb) / (sa + sb).sqrt();
        let df2 = (sa + sb).powi(2) / (sa * sa / (n - 1) as f64 + sb * sb / (m - 1) as f64);
        let welch = welch_t(&a, &b).unwrap();
        close(welch.t, t2, 1e-9, "welch t");
        close(welch.df, df2, 1e-9, "welch df");
        let p2 = oracle::two_sided_p(t2, df2);
        close(welch.p, p2, ORACLE_TOL, "welch p");

        worst = worst.max((one.p - p1).abs()).max((welch.p - p2).abs());
        for pairs in [1usize, 6, 15] {
            assert_eq!(
                bonferroni(welch.p, pairs),
                (welch.p * pairs as f64).min(1.0)
            );
        }
    }
    assert_eq!(bonferroni(0.01, 15), 0.15);
    assert_eq!(bonferroni(0.2, 15), 1.0);
    format!("20 samples, worst |p − oracle| = {worst:.2e}")
}

type Criterion = (&'static str, fn() -> String);

fn main() {
    let criteria: [Criterion; 8] = [
        ("speed grid N=5 D=20 mm", criterion_1),
        ("local speeds", criterion_2),
        ("speed grid N=4 d=10% over spacings", criterion_3),
        ("stroke geometry", criterion_4),
        ("overlap classification", criterion_5),
        ("control fidelity", criterion_6),
        ("study plans", criterion_7),
        ("statistics oracle", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match panic::catch_unwind(check) {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {} {name}: FAIL ({msg})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
