//! Staggered per-motor angle references and the skin-contact profile they produce.
//!
//! Every motor runs the same profile: hold at rest, rotate one full revolution at constant ω,
//! hold again. Motor `i` starts `i · d · 2π/ω` after motor 0. Time zero is the onset of motor 0,
//! so samples inside the pre-roll hold carry negative timestamps.
//!
//! Angles are unwrapped: a positive-sense motor rests at −π/2 and finishes at 3π/2, the same
//! physical pose one revolution later.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{indentation_at, ActuationParams, KinematicsError, TactorGeometry};

pub const DEFAULT_TICK_RATE: f64 = 10_000.0;
pub const DEFAULT_HOLD: f64 = 0.2;
/// Fewest reference samples per revolution accepted by [`build_schedule`].
pub const MIN_SAMPLES_PER_REV: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("tick rate must be positive and finite, got {0} Hz")]
    TickRate(f64),
    #[error("tick rate {tick_rate} Hz gives fewer than {MIN_SAMPLES_PER_REV} samples per revolution at {omega} rad/s")]
    TickRateTooLow { tick_rate: f64, omega: f64 },
    #[error("{name} hold must be non-negative and finite, got {value} s")]
    Hold { name: &'static str, value: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Direction every motor turns. Positive sweeps the tip from wrist towards elbow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationSense {
    #[default]
    Positive,
    Negative,
}

impl RotationSense {
    pub fn sign(self) -> f64 {
        match self {
            RotationSense::Positive => 1.0,
            RotationSense::Negative => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RotationSense::Positive => "positive",
            RotationSense::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOptions {
    pub tick_rate: f64,
    pub pre_roll: f64,
    pub post_roll: f64,
    pub sense: RotationSense,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            tick_rate: DEFAULT_TICK_RATE,
            pre_roll: DEFAULT_HOLD,
            post_roll: DEFAULT_HOLD,
            sense: RotationSense::Positive,
        }
    }
}

impl ScheduleOptions {
    pub fn with_tick_rate(tick_rate: f64) -> Self {
        Self {
            tick_rate,
            ..Self::default()
        }
    }

    /// No pre- or post-roll.
    pub fn without_holds(mut self) -> Self {
        self.pre_roll = 0.0;
        self.post_roll = 0.0;
        self
    }

    fn validate(&self) -> Result<(), ScheduleError> {
        if !(self.tick_rate.is_finite() && self.tick_rate > 0.0) {
            return Err(ScheduleError::TickRate(self.tick_rate));
        }
        for (name, value) in [("pre-roll", self.pre_roll), ("post-roll", self.post_roll)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ScheduleError::Hold { name, value });
            }
        }
        Ok(())
    }

    fn ticks(&self, seconds: f64) -> u64 {
        (seconds * self.tick_rate).round() as u64
    }
}

/// Sampled angle references for every motor of one stroke.
///
/// Samples are evaluated on demand from integer tick offsets, so two sets built from the same
/// inputs produce bit-identical samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    geometry: TactorGeometry,
    params: ActuationParams,
    options: ScheduleOptions,
    rotating: bool,
    pre_ticks: u64,
    post_ticks: u64,
    rotation_ticks: u64,
    onset_ticks: Vec<u64>,
}

pub fn build_schedule(
    geometry: &TactorGeometry,
    params: &ActuationParams,
    tick_rate: f64,
) -> Result<TrajectorySet, ScheduleError> {
    build_schedule_with(geometry, params, ScheduleOptions::with_tick_rate(tick_rate))
}

pub fn build_schedule_with(
    geometry: &TactorGeometry,
    params: &ActuationParams,
    options: ScheduleOptions,
) -> Result<TrajectorySet, ScheduleError> {
    options.validate()?;
    let omega = params.angular_velocity();
    if options.tick_rate < MIN_SAMPLES_PER_REV * omega / TAU {
        return Err(ScheduleError::TickRateTooLow {
            tick_rate: options.tick_rate,
            omega,
        });
    }
    let onset_ticks = (0..params.tactor_count())
        .map(|i| options.ticks(i as f64 * params.onset_delay()))
        .collect();
    Ok(TrajectorySet {
        geometry: *geometry,
        params: *params,
        options,
        rotating: true,
        pre_ticks: options.ticks(options.pre_roll),
        post_ticks: options.ticks(options.post_roll),
        rotation_ticks: options.ticks(params.rotation_period()),
        onset_ticks,
    })
}

/// A schedule in which no motor moves: every sample sits at the rest angle for
/// `pre_roll + post_roll` seconds.
pub fn hold_schedule(
    geometry: &TactorGeometry,
    params: &ActuationParams,
    options: ScheduleOptions,
) -> Result<TrajectorySet, ScheduleError> {
    let mut set = build_schedule_with(geometry, params, options)?;
    set.rotating = false;
    set.rotation_ticks = 0;
    set.onset_ticks = vec![0; params.tactor_count()];
    Ok(set)
}

impl TrajectorySet {
    pub fn geometry(&self) -> &TactorGeometry {
        &self.geometry
    }

    pub fn params(&self) -> &ActuationParams {
        &self.params
    }

    pub fn options(&self) -> &ScheduleOptions {
        &self.options
    }

    pub fn tick_rate(&self) -> f64 {
        self.options.tick_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.options.tick_rate
    }

    pub fn motor_count(&self) -> usize {
        self.onset_ticks.len()
    }

    pub fn is_rotating(&self) -> bool {
        self.rotating
    }

    pub fn rotation_ticks(&self) -> u64 {
        self.rotation_ticks
    }

    pub fn onset_ticks(&self) -> &[u64] {
        &self.onset_ticks
    }

    /// Rotation onsets in seconds from motor 0's onset.
    pub fn onsets(&self) -> Vec<f64> {
        self.onset_ticks
            .iter()
            .map(|&k| k as f64 / self.options.tick_rate)
            .collect()
    }

    /// Angular rate actually realised by the tick-quantised ramp.
    pub fn effective_angular_velocity(&self) -> f64 {
        if self.rotating {
            TAU * self.options.tick_rate / self.rotation_ticks as f64
        } else {
            0.0
        }
    }

    /// Onset of the first motor to the end of the last revolution, in seconds.
    pub fn rotation_window(&self) -> f64 {
        let last = self.onset_ticks.last().copied().unwrap_or(0);
        (last + self.rotation_ticks) as f64 / self.options.tick_rate
    }

    pub fn sample_count(&self) -> usize {
        let last = self.onset_ticks.last().copied().unwrap_or(0);
        let span = if self.rotating {
            last + self.rotation_ticks
        } else {
            0
        };
        (self.pre_ticks + span + self.post_ticks + 1) as usize
    }

    pub fn time(&self, sample: usize) -> f64 {
        (sample as f64 - self.pre_ticks as f64) / self.options.tick_rate
    }

    pub fn rest_angle(&self) -> f64 {
        -self.options.sense.sign() * FRAC_PI_2
    }

    pub fn angle(&self, motor: usize, sample: usize) -> f64 {
        let rest = self.rest_angle();
        if !self.rotating {
            return rest;
        }
        let start = self.pre_ticks + self.onset_ticks[motor];
        let sign = self.options.sense.sign();
        let sample = sample as u64;
        if sample <= start {
            rest
        } else if sample >= start + self.rotation_ticks {
            rest + sign * TAU
        } else {
            let progress = (sample - start) as f64 / self.rotation_ticks as f64;
            rest + sign * TAU * progress
        }
    }

    /// Reference angular rate of `motor` over the tick starting at `sample`.
    pub fn angular_rate(&self, motor: usize, sample: usize) -> f64 {
        if !self.rotating {
            return 0.0;
        }
        let start = self.pre_ticks + self.onset_ticks[motor];
        let s = sample as u64;
        if s >= start && s < start + self.rotation_ticks {
            self.options.sense.sign() * self.effective_angular_velocity()
        } else {
            0.0
        }
    }

    pub fn motor_samples(&self, motor: usize) -> Vec<f64> {
        (0..self.sample_count())
            .map(|k| self.angle(motor, k))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactEvent {
    pub motor: usize,
    pub contact_start: f64,
    pub contact_end: f64,
    /// `(time s, indentation mm)` at every tick inside the contact window.
    pub indentation: Vec<(f64, f64)>,
}

impl ContactEvent {
    pub fn duration(&self) -> f64 {
        self.contact_end - self.contact_start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactProfile {
    pub events: Vec<ContactEvent>,
    pub overlapping: bool,
    pub first_contact: Option<f64>,
    pub last_release: Option<f64>,
}

pub fn contact_profile(schedule: &TrajectorySet, geometry: &TactorGeometry) -> ContactProfile {
    if !schedule.rotating {
        return ContactProfile {
            events: Vec::new(),
            overlapping: false,
            first_contact: None,
            last_release: None,
        };
    }
    let omega = schedule.effective_angular_velocity();
    let exit = geometry.exit_angle();
    let to_contact = (FRAC_PI_2 - exit) / omega;
    let to_release = (FRAC_PI_2 + exit) / omega;
    let rate = schedule.tick_rate();
    // Window in ticks after onset; identical for every motor.
    let first_rel = (to_contact * rate).ceil() as u64;
    let last_rel = (to_release * rate).floor() as u64;

    let events: Vec<ContactEvent> = schedule
        .onsets()
        .into_iter()
        .enumerate()
        .map(|(motor, onset)| {
            let contact_start = onset + to_contact;
            let contact_end = onset + to_release;
            let base = schedule.pre_ticks + schedule.onset_ticks[motor];
            let indentation = (first_rel..=last_rel)
                .map(|rel| (base + rel) as usize)
                .map(|k| {
                    (
                        schedule.time(k),
                        indentation_at(geometry, schedule.angle(motor, k)),
                    )
                })
                .collect();
            ContactEvent {
                motor,
                contact_start,
                contact_end,
                indentation,
            }
        })
        .collect();

    let params = schedule.params();
    let overlapping =
        params.tactor_count() > 1 && params.delay_fraction() < geometry.exit_angle() / PI;
    let first_contact = events.first().map(|e| e.contact_start);
    let last_release = events.last().map(|e| e.contact_end);
    ContactProfile {
        events,
        overlapping,
        first_contact,
        last_release,
    }
}
