//! Device configuration file (TOML).
//!
//! Every section and key is optional; missing values fall back to the built-in defaults and
//! unknown keys are rejected with their line and column.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::kinematics::{
    derive_geometry, ActuationParams, AngularVelocity, KinematicsError, TactorGeometry,
};
use crate::motorsim::{MotorModel, PidGains};
use crate::scheduler::{RotationSense, ScheduleOptions, DEFAULT_HOLD, DEFAULT_TICK_RATE};

pub const CONFIG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("unsupported config format version {0} (expected {CONFIG_FORMAT_VERSION})")]
    Version(u32),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub tip_radius_mm: f64,
    pub trajectory_radius_mm: f64,
    pub max_indentation_mm: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            tip_radius_mm: 3.0,
            trajectory_radius_mm: 9.0,
            max_indentation_mm: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub tick_rate_hz: f64,
    pub pre_roll_s: f64,
    pub post_roll_s: f64,
    pub rotation: RotationSense,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            tick_rate_hz: DEFAULT_TICK_RATE,
            pre_roll_s: DEFAULT_HOLD,
            post_roll_s: DEFAULT_HOLD,
            rotation: RotationSense::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuationConfig {
    pub angular_velocity: AngularVelocity,
    pub delay_fraction: f64,
    pub tactor_count: usize,
    pub spacing_mm: f64,
}

impl Default for ActuationConfig {
    fn default() -> Self {
        Self {
            angular_velocity: AngularVelocity::pi_fraction(1, 1),
            delay_fraction: 0.10,
            tactor_count: 5,
            spacing_mm: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub format_version: u32,
    pub geometry: GeometryConfig,
    pub motor: MotorModel,
    pub pid: PidGains,
    pub schedule: ScheduleConfig,
    pub actuation: ActuationConfig,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            format_version: CONFIG_FORMAT_VERSION,
            geometry: GeometryConfig::default(),
            motor: MotorModel::default(),
            pid: PidGains::default(),
            schedule: ScheduleConfig::default(),
            actuation: ActuationConfig::default(),
        }
    }
}

impl DeviceConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let config: DeviceConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        if config.format_version != CONFIG_FORMAT_VERSION {
            return Err(ConfigError::Version(config.format_version));
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serialises")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        fs::write(path, self.to_toml_string()).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// First 16 hex digits of the SHA-256 of the serialised config.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn geometry(&self) -> Result<TactorGeometry, KinematicsError> {
        let g = &self.geometry;
        derive_geometry(
            g.tip_radius_mm,
            g.trajectory_radius_mm,
            g.max_indentation_mm,
        )
    }

    pub fn actuation_params(&self) -> Result<ActuationParams, KinematicsError> {
        let a = &self.actuation;
        ActuationParams::with_speed_cap(
            a.angular_velocity.value(),
            a.delay_fraction,
            a.tactor_count,
            a.spacing_mm,
            self.motor.speed_cap,
        )
    }

    pub fn schedule_options(&self) -> ScheduleOptions {
        ScheduleOptions {
            tick_rate: self.schedule.tick_rate_hz,
            pre_roll: self.schedule.pre_roll_s,
            post_roll: self.schedule.post_roll_s,
            sense: self.schedule.rotation,
        }
    }
}
