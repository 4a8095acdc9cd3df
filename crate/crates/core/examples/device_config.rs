//! Write a device config, edit it, load it back and show what it changes.
//!
//! Run with `cargo run --example device_config`.

use slipstroke::config::DeviceConfig;
use slipstroke::kinematics::speed_summary;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = DeviceConfig::default();
    println!("{}", config.to_toml_string());
    println!("hash {}", config.hash());

    config.actuation.spacing_mm = 35.0;
    config.actuation.tactor_count = 4;
    let path = std::env::temp_dir().join("slipstroke_device.toml");
    config.save(&path)?;
    let loaded = DeviceConfig::load(&path)?;
    assert_eq!(loaded, config);

    let s = speed_summary(&loaded.geometry()?, &loaded.actuation_params()?);
    println!(
        "loaded {} (hash {}): apparent {:.1} mm/s, local {:.1} mm/s",
        path.display(),
        loaded.hash(),
        s.apparent_speed,
        s.local_speed
    );

    match DeviceConfig::from_toml_str("[geometry]\ntip_radius_mm = 3.0\nradius = 9\n", "inline") {
        Ok(_) => println!("unexpected: unknown key accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
