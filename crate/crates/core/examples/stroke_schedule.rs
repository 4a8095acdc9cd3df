//! Build a five-motor stroke, list its contact windows, then export and re-import the
//! command stream.
//!
//! Run with `cargo run --example stroke_schedule`.

use std::f64::consts::TAU;

use slipstroke::kinematics::{speed_summary, ActuationParams, TactorGeometry};
use slipstroke::scheduler::{build_schedule, contact_profile, DEFAULT_TICK_RATE};
use slipstroke::stream::{export_command_stream, import_command_stream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let geometry = TactorGeometry::default();
    for delay in [0.10, 0.25] {
        let params = ActuationParams::new(TAU, delay, 5, 20.0)?;
        let schedule = build_schedule(&geometry, &params, DEFAULT_TICK_RATE)?;
        let profile = contact_profile(&schedule, &geometry);
        let speeds = speed_summary(&geometry, &params);
        println!(
            "d = {delay}: {} samples, overlap {}, apparent {:.1} mm/s",
            schedule.sample_count(),
            profile.overlapping,
            speeds.apparent_speed
        );
        for e in &profile.events {
            let peak = e.indentation.iter().map(|p| p.1).fold(0.0, f64::max);
            println!(
                "  motor {}: {:.4} .. {:.4} s, peak indentation {peak:.3} mm",
                e.motor, e.contact_start, e.contact_end
            );
        }

        let path = std::env::temp_dir().join(format!("stroke_d{delay}.csv"));
        export_command_stream(&path, &schedule, &profile, None, &["example".into()])?;
        let back = import_command_stream(&path)?;
        println!(
            "  wrote {}, re-import bit-exact: {}",
            path.display(),
            back.matches_schedule()
        );
    }
    Ok(())
}
