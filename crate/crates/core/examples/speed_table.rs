//! Apparent contact-point speed over the five angular velocities and six onset delays.
//!
//! Run with `cargo run --example speed_table`.

use slipstroke::kinematics::{
    cm_per_s_1dp, speed_table, study_angular_velocities, write_speed_csv, TactorGeometry,
    STUDY_DELAY_FRACTIONS,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let geometry = TactorGeometry::default();
    println!(
        "exit angle {:.4} rad, skin travel per pass {:.3} mm",
        geometry.exit_angle(),
        geometry.skin_travel()
    );
    println!(
        "overlap below delay fraction {:.4}\n",
        geometry.overlap_threshold()
    );

    let cells = speed_table(
        &geometry,
        &study_angular_velocities(),
        &STUDY_DELAY_FRACTIONS,
        5,
        20.0,
    )?;
    write_speed_csv(&mut std::io::stdout().lock(), &cells)?;

    let speeds: Vec<f64> = cells
        .iter()
        .map(|c| cm_per_s_1dp(c.summary.apparent_speed))
        .collect();
    let min = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("\nrange {min} .. {max} cm/s");
    let in_band = speeds.iter().filter(|v| (1.0..=10.0).contains(*v)).count();
    println!("{in_band} of {} cells fall in 1-10 cm/s", speeds.len());
    Ok(())
}
