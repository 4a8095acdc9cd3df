//! Contact geometry and stroke speeds for a rounded tactor swept through the skin plane.
//!
//! A tactor tip of radius `R_S` rides on an arm of radius `R_L` about the motor shaft. The shaft
//! sits at a standoff `H` above the (rigid, planar) skin, chosen so the tip indents `I_max` at the
//! bottom of its sweep. The tip is in contact for shaft angles in `[-θ, θ]` and slides a distance
//! `2x` along the skin during that pass.
//!
//! All lengths are millimetres, angles radians, times seconds and speeds mm/s unless a function
//! name says otherwise.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 92 RPM at the gearbox output, in rad/s.
pub const DEFAULT_SPEED_CAP: f64 = 92.0 * 2.0 * PI / 60.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("max indentation {max_indentation} mm must lie strictly inside (0, trajectory radius {trajectory_radius} mm)")]
    IndentationOutOfRange {
        max_indentation: f64,
        trajectory_radius: f64,
    },
    #[error("exit-angle cosine {0} is outside (0, 1)")]
    ArccosDomain(f64),
    #[error("delay fraction {0} is outside [0, 1]")]
    DelayOutOfRange(f64),
    #[error("tactor count must be at least 1")]
    NoTactors,
    #[error("spacing must be positive when more than one tactor is used, got {0}")]
    Spacing(f64),
    #[error("angular velocity {omega} rad/s exceeds the speed cap {cap} rad/s")]
    ExceedsSpeedCap { omega: f64, cap: f64 },
    #[error("{0} list is empty")]
    EmptyList(&'static str),
    #[error("cannot parse angular velocity {0:?}")]
    BadAngularVelocity(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, KinematicsError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(KinematicsError::NonPositive { name, value })
    }
}

/// Tactor geometry with the derived standoff, exit angle and half travel.
///
/// Only constructible through [`derive_geometry`], so the derived fields always agree with the
/// three primary dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TactorGeometry {
    tip_radius: f64,
    trajectory_radius: f64,
    max_indentation: f64,
    standoff: f64,
    exit_angle: f64,
    half_travel: f64,
}

impl TactorGeometry {
    pub fn tip_radius(&self) -> f64 {
        self.tip_radius
    }

    pub fn trajectory_radius(&self) -> f64 {
        self.trajectory_radius
    }

    pub fn max_indentation(&self) -> f64 {
        self.max_indentation
    }

    /// Shaft centre to skin surface.
    pub fn standoff(&self) -> f64 {
        self.standoff
    }

    /// Half-angle of the contact arc.
    pub fn exit_angle(&self) -> f64 {
        self.exit_angle
    }

    /// Horizontal tip travel from perpendicular contact to release.
    pub fn half_travel(&self) -> f64 {
        self.half_travel
    }

    /// Total distance slid along the skin by one tactor.
    pub fn skin_travel(&self) -> f64 {
        2.0 * self.half_travel
    }

    /// The delay fraction below which adjacent contacts overlap in time (θ/π).
    pub fn overlap_threshold(&self) -> f64 {
        self.exit_angle / PI
    }
}

impl Default for TactorGeometry {
    /// 3 mm tip, 9 mm arm, 1.5 mm indentation.
    fn default() -> Self {
        derive_geometry(3.0, 9.0, 1.5).expect("default geometry is valid")
    }
}

pub fn derive_geometry(
    tip_radius: f64,
    trajectory_radius: f64,
    max_indentation: f64,
) -> Result<TactorGeometry, KinematicsError> {
    positive("tip radius", tip_radius)?;
    positive("trajectory radius", trajectory_radius)?;
    if !(max_indentation.is_finite()
        && max_indentation > 0.0
        && max_indentation < trajectory_radius)
    {
        return Err(KinematicsError::IndentationOutOfRange {
            max_indentation,
            trajectory_radius,
        });
    }
    let standoff = tip_radius + trajectory_radius - max_indentation;
    let cos_exit = (standoff - tip_radius) / trajectory_radius;
    if !(cos_exit > 0.0 && cos_exit < 1.0) {
        return Err(KinematicsError::ArccosDomain(cos_exit));
    }
    let exit_angle = cos_exit.acos();
    let half_travel = trajectory_radius * exit_angle.sin();
    Ok(TactorGeometry {
        tip_radius,
        trajectory_radius,
        max_indentation,
        standoff,
        exit_angle,
        half_travel,
    })
}

/// Tip indentation below the skin plane at shaft angle `angle` (0 = perpendicular).
///
/// Zero whenever `|angle| >= exit_angle`. The angle is not wrapped.
pub fn indentation_at(geometry: &TactorGeometry, angle: f64) -> f64 {
    if angle.is_nan() || angle.abs() >= geometry.exit_angle {
        return 0.0;
    }
    let y = geometry.trajectory_radius * angle.cos();
    (geometry.max_indentation + y - geometry.trajectory_radius).max(0.0)
}

pub fn local_speed(
    geometry: &TactorGeometry,
    angular_velocity: f64,
) -> Result<f64, KinematicsError> {
    positive("angular velocity", angular_velocity)?;
    Ok(geometry.half_travel * angular_velocity / geometry.exit_angle)
}

/// Stroke actuation parameters: angular velocity ω, delay fraction d, tactor count N, spacing D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuationParams {
    angular_velocity: f64,
    delay_fraction: f64,
    tactor_count: usize,
    spacing: f64,
}

impl ActuationParams {
    /// Validates against [`DEFAULT_SPEED_CAP`].
    pub fn new(
        angular_velocity: f64,
        delay_fraction: f64,
        tactor_count: usize,
        spacing: f64,
    ) -> Result<Self, KinematicsError> {
        Self::with_speed_cap(
            angular_velocity,
            delay_fraction,
            tactor_count,
            spacing,
            DEFAULT_SPEED_CAP,
        )
    }

    pub fn with_speed_cap(
        angular_velocity: f64,
        delay_fraction: f64,
        tactor_count: usize,
        spacing: f64,
        speed_cap: f64,
    ) -> Result<Self, KinematicsError> {
        positive("angular velocity", angular_velocity)?;
        if angular_velocity > speed_cap {
            return Err(KinematicsError::ExceedsSpeedCap {
                omega: angular_velocity,
                cap: speed_cap,
            });
        }
        if !(0.0..=1.0).contains(&delay_fraction) {
            return Err(KinematicsError::DelayOutOfRange(delay_fraction));
        }
        if tactor_count == 0 {
            return Err(KinematicsError::NoTactors);
        }
        let spacing_ok = if tactor_count > 1 {
            spacing.is_finite() && spacing > 0.0
        } else {
            spacing.is_finite() && spacing >= 0.0
        };
        if !spacing_ok {
            return Err(KinematicsError::Spacing(spacing));
        }
        Ok(Self {
            angular_velocity,
            delay_fraction,
            tactor_count,
            spacing,
        })
    }

    pub fn angular_velocity(&self) -> f64 {
        self.angular_velocity
    }

    pub fn delay_fraction(&self) -> f64 {
        self.delay_fraction
    }

    pub fn tactor_count(&self) -> usize {
        self.tactor_count
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Time for one full revolution, 2π/ω.
    pub fn rotation_period(&self) -> f64 {
        2.0 * PI / self.angular_velocity
    }

    /// Onset-to-onset delay between adjacent motors in seconds.
    pub fn onset_delay(&self) -> f64 {
        self.delay_fraction * self.rotation_period()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedSummary {
    pub stroke_skin_travel: f64,
    pub contact_time: f64,
    pub actuation_time: f64,
    pub local_speed: f64,
    pub apparent_speed: f64,
}

/// Returns `(contact_time, actuation_time)`: the span from first skin contact to last release,
/// and the span from first onset until every motor has finished its revolution.
pub fn stroke_times(geometry: &TactorGeometry, params: &ActuationParams) -> (f64, f64) {
    let period = params.rotation_period();
    let stagger = params.delay_fraction * (params.tactor_count - 1) as f64;
    let contact = period * (geometry.exit_angle / PI + stagger);
    let actuation = period * (1.0 + stagger);
    (contact, actuation)
}

pub fn apparent_speed(geometry: &TactorGeometry, params: &ActuationParams) -> f64 {
    let (contact_time, _) = stroke_times(geometry, params);
    let distance = geometry.skin_travel() + params.spacing * (params.tactor_count - 1) as f64;
    distance / contact_time
}

pub fn speed_summary(geometry: &TactorGeometry, params: &ActuationParams) -> SpeedSummary {
    let (contact_time, actuation_time) = stroke_times(geometry, params);
    SpeedSummary {
        stroke_skin_travel: geometry.skin_travel(),
        contact_time,
        actuation_time,
        local_speed: geometry.half_travel * params.angular_velocity / geometry.exit_angle,
        apparent_speed: apparent_speed(geometry, params),
    }
}

/// Angular velocity that remembers an exact multiple of π when it was given as one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularVelocity {
    /// `num·π/den` rad/s.
    PiFraction {
        num: u32,
        den: u32,
    },
    Radians(f64),
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl AngularVelocity {
    pub fn pi_fraction(num: u32, den: u32) -> Self {
        let g = gcd(num, den).max(1);
        AngularVelocity::PiFraction {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            AngularVelocity::PiFraction { num, den } => num as f64 * PI / den as f64,
            AngularVelocity::Radians(v) => v,
        }
    }
}

impl fmt::Display for AngularVelocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AngularVelocity::PiFraction { num, den } => {
                if num != 1 {
                    write!(f, "{num}")?;
                }
                f.write_str("pi")?;
                if den != 1 {
                    write!(f, "/{den}")?;
                }
                Ok(())
            }
            AngularVelocity::Radians(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for AngularVelocity {
    type Err = KinematicsError;

    /// Accepts `pi`, `2pi`, `2pi/3`, `pi/2` or a plain number of rad/s.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || KinematicsError::BadAngularVelocity(s.to_string());
        let token = s.trim();
        let Some((coef, rest)) = token.split_once("pi") else {
            let v: f64 = token.parse().map_err(|_| bad())?;
            positive("angular velocity", v)?;
            return Ok(AngularVelocity::Radians(v));
        };
        let num = if coef.is_empty() {
            1
        } else {
            coef.parse::<u32>().map_err(|_| bad())?
        };
        let den = if rest.is_empty() {
            1
        } else {
            rest.strip_prefix('/')
                .ok_or_else(bad)?
                .parse::<u32>()
                .map_err(|_| bad())?
        };
        if num == 0 || den == 0 {
            return Err(bad());
        }
        Ok(AngularVelocity::pi_fraction(num, den))
    }
}

impl Serialize for AngularVelocity {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AngularVelocity {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The five angular velocities of the stroke studies: 2π, 4π/3, π, 4π/5 and 2π/3 rad/s.
pub fn study_angular_velocities() -> [AngularVelocity; 5] {
    [
        AngularVelocity::pi_fraction(2, 1),
        AngularVelocity::pi_fraction(4, 3),
        AngularVelocity::pi_fraction(1, 1),
        AngularVelocity::pi_fraction(4, 5),
        AngularVelocity::pi_fraction(2, 3),
    ]
}

/// Delay fractions 0 %, 5 %, … 25 %.
pub const STUDY_DELAY_FRACTIONS: [f64; 6] = [0.0, 0.05, 0.10, 0.15, 0.20, 0.25];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedCell {
    pub angular_velocity: AngularVelocity,
    pub delay_fraction: f64,
    pub tactor_count: usize,
    pub spacing: f64,
    pub summary: SpeedSummary,
}

/// Evaluates every (ω, d) pair; cells are ordered by delay, then angular velocity.
pub fn speed_table(
    geometry: &TactorGeometry,
    angular_velocities: &[AngularVelocity],
    delay_fractions: &[f64],
    tactor_count: usize,
    spacing: f64,
) -> Result<Vec<SpeedCell>, KinematicsError> {
    if angular_velocities.is_empty() {
        return Err(KinematicsError::EmptyList("angular velocity"));
    }
    if delay_fractions.is_empty() {
        return Err(KinematicsError::EmptyList("delay fraction"));
    }
    let mut cells = Vec::with_capacity(angular_velocities.len() * delay_fractions.len());
    for &delay in delay_fractions {
        for &omega in angular_velocities {
            let params = ActuationParams::new(omega.value(), delay, tactor_count, spacing)?;
            cells.push(SpeedCell {
                angular_velocity: omega,
                delay_fraction: delay,
                tactor_count,
                spacing,
                summary: speed_summary(geometry, &params),
            });
        }
    }
    Ok(cells)
}

/// mm/s to cm/s rounded to one decimal.
pub fn cm_per_s_1dp(mm_per_s: f64) -> f64 {
    mm_per_s.round() / 10.0
}

/// Writes a speed grid as a table: one row per angular velocity, one column per delay
/// (percent), apparent speeds in cm/s to one decimal.
pub fn write_speed_csv<W: std::io::Write>(out: &mut W, cells: &[SpeedCell]) -> std::io::Result<()> {
    let mut delays: Vec<f64> = Vec::new();
    let mut omegas: Vec<AngularVelocity> = Vec::new();
    for cell in cells {
        if !delays.contains(&cell.delay_fraction) {
            delays.push(cell.delay_fraction);
        }
        if !omegas.contains(&cell.angular_velocity) {
            omegas.push(cell.angular_velocity);
        }
    }
    write!(out, "omega_rad_s")?;
    for d in &delays {
        write!(out, ",{}", format_percent(*d))?;
    }
    writeln!(out, ",local_cm_s")?;
    for omega in &omegas {
        write!(out, "{omega}")?;
        let mut local = None;
        for d in &delays {
            match cells
                .iter()
                .find(|c| c.angular_velocity == *omega && c.delay_fraction == *d)
            {
                Some(c) => {
                    local = Some(c.summary.local_speed);
                    write!(out, ",{:.1}", cm_per_s_1dp(c.summary.apparent_speed))?;
                }
                None => write!(out, ",")?,
            }
        }
        match local {
            Some(v) => writeln!(out, ",{:.1}", cm_per_s_1dp(v))?,
            None => writeln!(out, ",")?,
        }
    }
    Ok(())
}

fn format_percent(fraction: f64) -> String {
    let pct = fraction * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}")
    }
}
