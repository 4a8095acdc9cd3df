//! Closed-loop position tracking of one geared DC motor.
//!
//! The plant is the output shaft of a gearmotor: reflected inertia, viscous damping and a
//! torque proportional to the (saturated) amplifier current. Shaft speed is clamped at the gearbox
//! speed cap. A quadrature encoder reports whole counts, and a PID loop running at the reference
//! tick rate turns the count error into a current command. The derivative term acts on the
//! measured position through a one-pole low-pass.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{ActuationParams, DEFAULT_SPEED_CAP};
use crate::scheduler::TrajectorySet;

/// Sustained error beyond this many radians counts as divergence.
pub const DIVERGENCE_ERROR: f64 = TAU;
/// Span over which exceedances of [`DIVERGENCE_ERROR`] must keep recurring before a run is declared unstable.
pub const DIVERGENCE_WINDOW: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("motor model field {field} must be positive and finite, got {value}")]
    Model { field: &'static str, value: f64 },
    #[error("PID field {field} must be non-negative and finite, got {value}")]
    Gains { field: &'static str, value: f64 },
    #[error("time step must be positive and finite, got {0}")]
    TimeStep(f64),
    #[error("reference trajectory is empty")]
    EmptyReference,
    #[error("simulation diverged: tracking error exceeded {DIVERGENCE_ERROR:.4} rad from t = {time:.4} s")]
    Instability { time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotorModel {
    pub gear_ratio: f64,
    /// Output-shaft speed limit, rad/s.
    pub speed_cap: f64,
    /// Amplifier current limit, A.
    pub current_limit: f64,
    /// Output-shaft torque per amp, N·m/A.
    pub torque_constant: f64,
    /// Inertia reflected to the output shaft, kg·m².
    pub inertia: f64,
    /// Viscous damping at the output shaft, N·m·s/rad.
    pub damping: f64,
    pub encoder_counts_per_rev: u32,
}

impl Default for MotorModel {
    fn default() -> Self {
        Self {
            gear_ratio: 141.0,
            speed_cap: DEFAULT_SPEED_CAP,
            current_limit: 0.010,
            torque_constant: 2.5,
            inertia: 2.0e-5,
            damping: 2.0e-4,
            // 16-line encoder, x4 decoding, through the 141:1 gearbox.
            encoder_counts_per_rev: 64 * 141,
        }
    }
}

impl MotorModel {
    pub fn validate(&self) -> Result<(), SimError> {
        for (field, value) in [
            ("gear_ratio", self.gear_ratio),
            ("speed_cap", self.speed_cap),
            ("current_limit", self.current_limit),
            ("torque_constant", self.torque_constant),
            ("inertia", self.inertia),
            ("damping", self.damping),
            ("encoder_counts_per_rev", self.encoder_counts_per_rev as f64),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SimError::Model { field, value });
            }
        }
        Ok(())
    }

    pub fn encoder_counts(&self, angle: f64) -> i64 {
        (angle * self.encoder_counts_per_rev as f64 / TAU).floor() as i64
    }

    pub fn counts_to_angle(&self, counts: i64) -> f64 {
        counts as f64 * TAU / self.encoder_counts_per_rev as f64
    }

    /// Angle of one encoder count.
    pub fn resolution(&self) -> f64 {
        TAU / self.encoder_counts_per_rev as f64
    }
}

/// PID gains mapping position error (rad) to commanded current (A).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on the integral term's contribution, A.
    pub integral_clamp: f64,
    /// Time constant of the derivative low-pass, s.
    pub derivative_filter: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 1.0,
            ki: 40.0,
            kd: 1.0e-3,
            integral_clamp: 0.010,
            derivative_filter: 5.0e-4,
        }
    }
}

impl PidGains {
    pub fn zero() -> Self {
        Self {
            kp: 0.0,
            ki: 0.0,
            kd: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (field, value) in [
            ("kp", self.kp),
            ("ki", self.ki),
            ("kd", self.kd),
            ("integral_clamp", self.integral_clamp),
            ("derivative_filter", self.derivative_filter),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SimError::Gains { field, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackingSummary {
    pub max_abs_error: f64,
    pub rms_error: f64,
    /// Fraction of ticks on which the PID output hit the current limit.
    pub saturation_fraction: f64,
}

/// Per-tick record of one run. Index `k` holds the state at the start of tick `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackingResult {
    pub angle: Vec<f64>,
    pub encoder_counts: Vec<i64>,
    pub current: Vec<f64>,
    /// Reference minus true shaft angle.
    pub error: Vec<f64>,
    pub summary: TrackingSummary,
}

struct Pid {
    gains: PidGains,
    dt: f64,
    integral: f64,
    prev_measured: Option<f64>,
    rate_filtered: f64,
}

impl Pid {
    fn new(gains: PidGains, dt: f64) -> Self {
        Self {
            gains,
            dt,
            integral: 0.0,
            prev_measured: None,
            rate_filtered: 0.0,
        }
    }

    /// Returns the unsaturated current command.
    fn update(&mut self, error: f64, measured: f64) -> f64 {
        let g = &self.gains;
        let raw_rate = match self.prev_measured {
            Some(prev) => (measured - prev) / self.dt,
            None => 0.0,
        };
        self.prev_measured = Some(measured);
        let alpha = self.dt / (g.derivative_filter + self.dt);
        self.rate_filtered += alpha * (raw_rate - self.rate_filtered);

        if g.ki > 0.0 {
            self.integral += error * self.dt;
            let limit = g.integral_clamp / g.ki;
            self.integral = self.integral.clamp(-limit, limit);
        }
        g.kp * error + g.ki * self.integral - g.kd * self.rate_filtered
    }
}

/// Tracks `reference` (one angle per tick, spacing `dt`) starting at rest on the first sample.
pub fn simulate_tracking(
    model: &MotorModel,
    gains: &PidGains,
    reference: &[f64],
    dt: f64,
) -> Result<TrackingResult, SimError> {
    model.validate()?;
    gains.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::TimeStep(dt));
    }
    let Some(&initial) = reference.first() else {
        return Err(SimError::EmptyReference);
    };

    let cpr = model.encoder_counts_per_rev as f64;
    let n = reference.len();
    let mut out = TrackingResult {
        angle: Vec::with_capacity(n),
        encoder_counts: Vec::with_capacity(n),
        current: Vec::with_capacity(n),
        error: Vec::with_capacity(n),
        summary: TrackingSummary {
            max_abs_error: 0.0,
            rms_error: 0.0,
            saturation_fraction: 0.0,
        },
    };

    let mut pid = Pid::new(*gains, dt);
    let mut angle = initial;
    let mut velocity = 0.0;
    let mut saturated = 0usize;
    let mut sum_sq = 0.0;
    let mut excursion: Option<(usize, usize)> = None;
    let window_ticks = (DIVERGENCE_WINDOW / dt).round() as usize;

    for (k, &target) in reference.iter().enumerate() {
        let counts = model.encoder_counts(angle);
        let measured = model.counts_to_angle(counts);
        // Error in counts so an on-count reference yields exactly zero.
        let control_error = (target * cpr / TAU - counts as f64) * TAU / cpr;
        let command = pid.update(control_error, measured);
        let current = command.clamp(-model.current_limit, model.current_limit);
        if command.abs() > model.current_limit {
            saturated += 1;
        }
        assert!(current.abs() <= model.current_limit);

        let error = target - angle;
        if !error.is_finite() {
            return Err(SimError::Instability {
                time: k as f64 * dt,
            });
        }
        // An excursion keeps running while exceedances recur within one window, so an
        // oscillation that keeps swinging through zero still counts as sustained.
        if error.abs() > DIVERGENCE_ERROR {
            let since = match excursion {
                Some((start, last)) if k - last <= window_ticks => start,
                _ => k,
            };
            excursion = Some((since, k));
            if k - since >= window_ticks {
                return Err(SimError::Instability {
                    time: since as f64 * dt,
                });
            }
        }

        out.angle.push(angle);
        out.encoder_counts.push(counts);
        out.current.push(current);
        out.error.push(error);
        out.summary.max_abs_error = out.summary.max_abs_error.max(error.abs());
        sum_sq += error * error;

        // Semi-implicit Euler.
        let torque = model.torque_constant * current - model.damping * velocity;
        velocity += torque / model.inertia * dt;
        velocity = velocity.clamp(-model.speed_cap, model.speed_cap);
        angle += velocity * dt;
    }

    out.summary.rms_error = (sum_sq / n as f64).sqrt();
    out.summary.saturation_fraction = saturated as f64 / n as f64;
    Ok(out)
}

/// Tracks one motor's reference from `schedule` at the schedule's tick rate.
pub fn simulate_motor(
    model: &MotorModel,
    gains: &PidGains,
    schedule: &TrajectorySet,
    motor: usize,
) -> Result<TrackingResult, SimError> {
    simulate_tracking(model, gains, &schedule.motor_samples(motor), schedule.dt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedCapCheck {
    pub pass: bool,
    /// `speed_cap − ω`; negative when the request exceeds the cap.
    pub margin: f64,
}

pub fn validate_speed_cap(params: &ActuationParams, model: &MotorModel) -> SpeedCapCheck {
    speed_cap_margin(params.angular_velocity(), model)
}

/// Same check for a bare angular velocity, which may lie above what [`ActuationParams`] accepts.
pub fn speed_cap_margin(angular_velocity: f64, model: &MotorModel) -> SpeedCapCheck {
    let margin = model.speed_cap - angular_velocity;
    SpeedCapCheck {
        pass: angular_velocity <= model.speed_cap,
        margin,
    }
}
