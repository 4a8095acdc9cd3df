//! Closed-loop tracking of one stroke with the default motor model and gains, then the
//! same stroke with the loop opened.
//!
//! Run with `cargo run --example motor_tracking`.

use std::f64::consts::PI;

use slipstroke::kinematics::{ActuationParams, TactorGeometry};
use slipstroke::motorsim::{simulate_motor, validate_speed_cap, MotorModel, PidGains};
use slipstroke::scheduler::{build_schedule, DEFAULT_TICK_RATE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let geometry = TactorGeometry::default();
    let model = MotorModel::default();
    let params = ActuationParams::new(4.0 * PI / 3.0, 0.15, 5, 20.0)?;
    let check = validate_speed_cap(&params, &model);
    println!(
        "speed cap {:.3} rad/s, margin {:.3}",
        model.speed_cap, check.margin
    );
    println!("encoder resolution {:.6} rad", model.resolution());

    let schedule = build_schedule(&geometry, &params, DEFAULT_TICK_RATE)?;
    for (name, gains) in [
        ("tuned", PidGains::default()),
        ("open loop", PidGains::zero()),
    ] {
        println!("\n{name}:");
        for motor in 0..schedule.motor_count() {
            let r = simulate_motor(&model, &gains, &schedule, motor)?;
            println!(
                "  motor {motor}: max {:.5} rad, rms {:.5} rad, saturated {:.1}%",
                r.summary.max_abs_error,
                r.summary.rms_error,
                100.0 * r.summary.saturation_fraction
            );
        }
    }
    Ok(())
}
