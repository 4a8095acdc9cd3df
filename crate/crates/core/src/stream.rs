//! Command-stream CSV: one row per control tick with every motor's reference angle and
//! indentation, optionally followed by simulated tracking columns.
//!
//! ```text
//! # slipstroke-command-stream version=1 tip_radius_mm=3 ... motion=stroke
//! # <free-form provenance comments>
//! t_s,motor_0_rad,...,motor_0_indent_mm,...[,motor_0_actual_rad,...,motor_0_error_rad,...]
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a stream back yields bit-identical
//! values.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::kinematics::{derive_geometry, indentation_at, ActuationParams};
use crate::motorsim::TrackingResult;
use crate::scheduler::{
    build_schedule_with, hold_schedule, ContactProfile, RotationSense, ScheduleOptions,
    TrajectorySet,
};

pub const FORMAT_NAME: &str = "slipstroke-command-stream";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("tracking results for {got} motors, schedule has {expected}")]
    MotorMismatch { expected: usize, got: usize },
}

impl StreamError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        StreamError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// The header line describing everything needed to rebuild the schedule.
pub fn header_line(schedule: &TrajectorySet) -> String {
    let g = schedule.geometry();
    let p = schedule.params();
    let o = schedule.options();
    format!(
        "# {FORMAT_NAME} version={FORMAT_VERSION} tip_radius_mm={} trajectory_radius_mm={} \
         max_indentation_mm={} angular_velocity_rad_s={} delay_fraction={} tactor_count={} \
         spacing_mm={} tick_rate_hz={} pre_roll_s={} post_roll_s={} rotation={} motion={}",
        g.tip_radius(),
        g.trajectory_radius(),
        g.max_indentation(),
        p.angular_velocity(),
        p.delay_fraction(),
        p.tactor_count(),
        p.spacing(),
        o.tick_rate,
        o.pre_roll,
        o.post_roll,
        o.sense.as_str(),
        if schedule.is_rotating() {
            "stroke"
        } else {
            "hold"
        },
    )
}

fn contact_line(profile: &ContactProfile) -> String {
    let fmt = |t: Option<f64>| t.map_or_else(|| "none".to_string(), |v| v.to_string());
    format!(
        "contact overlapping={} first_contact_s={} last_release_s={}",
        profile.overlapping,
        fmt(profile.first_contact),
        fmt(profile.last_release)
    )
}

/// Writes the reference stream; `tracking`, when given, appends actual and error columns.
pub fn write_command_stream<W: Write>(
    out: &mut W,
    schedule: &TrajectorySet,
    profile: &ContactProfile,
    tracking: Option<&[TrackingResult]>,
    provenance: &[String],
) -> Result<(), StreamError> {
    let motors = schedule.motor_count();
    if let Some(t) = tracking {
        if t.len() != motors {
            return Err(StreamError::MotorMismatch {
                expected: motors,
                got: t.len(),
            });
        }
    }
    let io_err = |source| StreamError::Io {
        path: PathBuf::from("<stream>"),
        source,
    };
    let mut write = || -> io::Result<()> {
        writeln!(out, "{}", header_line(schedule))?;
        writeln!(out, "# {}", contact_line(profile))?;
        for line in provenance {
            writeln!(out, "# {line}")?;
        }
        let mut cols = vec!["t_s".to_string()];
        cols.extend((0..motors).map(|m| format!("motor_{m}_rad")));
        cols.extend((0..motors).map(|m| format!("motor_{m}_indent_mm")));
        if tracking.is_some() {
            cols.extend((0..motors).map(|m| format!("motor_{m}_actual_rad")));
            cols.extend((0..motors).map(|m| format!("motor_{m}_error_rad")));
        }
        writeln!(out, "{}", cols.join(","))?;

        let geometry = schedule.geometry();
        let mut row = String::new();
        for k in 0..schedule.sample_count() {
            use std::fmt::Write as _;
            row.clear();
            let _ = write!(row, "{}", schedule.time(k));
            for m in 0..motors {
                let _ = write!(row, ",{}", schedule.angle(m, k));
            }
            for m in 0..motors {
                let _ = write!(row, ",{}", indentation_at(geometry, schedule.angle(m, k)));
            }
            if let Some(results) = tracking {
                for r in results {
                    let _ = write!(row, ",{}", r.angle[k]);
                }
                for r in results {
                    let _ = write!(row, ",{}", r.error[k]);
                }
            }
            writeln!(out, "{row}")?;
        }
        out.flush()
    };
    write().map_err(io_err)
}

/// Writes the stream to `path`, reporting I/O failures with the path.
pub fn export_command_stream(
    path: &Path,
    schedule: &TrajectorySet,
    profile: &ContactProfile,
    tracking: Option<&[TrackingResult]>,
    provenance: &[String],
) -> Result<(), StreamError> {
    let with_path = |source| StreamError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(with_path)?;
    let mut out = BufWriter::new(file);
    write_command_stream(&mut out, schedule, profile, tracking, provenance).map_err(|e| match e {
        StreamError::Io { source, .. } => with_path(source),
        other => other,
    })
}

/// A stream read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedStream {
    /// Schedule rebuilt from the header line.
    pub schedule: TrajectorySet,
    pub times: Vec<f64>,
    /// `angles[motor][sample]`.
    pub angles: Vec<Vec<f64>>,
    pub indentation: Vec<Vec<f64>>,
    /// Empty unless the stream carried tracking columns.
    pub actual: Vec<Vec<f64>>,
    pub error: Vec<Vec<f64>>,
}

impl ImportedStream {
    /// True when every stored angle equals the rebuilt schedule's sample bit for bit.
    pub fn matches_schedule(&self) -> bool {
        let s = &self.schedule;
        self.times.len() == s.sample_count()
            && self.angles.len() == s.motor_count()
            && self
                .times
                .iter()
                .enumerate()
                .all(|(k, t)| t.to_bits() == s.time(k).to_bits())
            && self.angles.iter().enumerate().all(|(m, col)| {
                col.iter()
                    .enumerate()
                    .all(|(k, a)| a.to_bits() == s.angle(m, k).to_bits())
            })
    }
}

fn parse_header(line: &str) -> Result<TrajectorySet, StreamError> {
    let err = |msg: String| StreamError::parse(1, msg);
    let body = line
        .strip_prefix('#')
        .map(str::trim)
        .ok_or_else(|| err("missing header line".into()))?;
    let mut parts = body.split_whitespace();
    if parts.next() != Some(FORMAT_NAME) {
        return Err(err(format!("not a {FORMAT_NAME} file")));
    }
    let fields: BTreeMap<&str, &str> = parts
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| err(format!("malformed field {kv:?}")))
        })
        .collect::<Result<_, _>>()?;
    let get = |key: &str| {
        fields
            .get(key)
            .copied()
            .ok_or_else(|| err(format!("missing header field {key}")))
    };
    let num = |key: &str| -> Result<f64, StreamError> {
        get(key)?
            .parse::<f64>()
            .map_err(|e| err(format!("{key}: {e}")))
    };
    let version: u32 = get("version")?
        .parse()
        .map_err(|e| err(format!("version: {e}")))?;
    if version != FORMAT_VERSION {
        return Err(err(format!("unsupported format version {version}")));
    }
    let geometry = derive_geometry(
        num("tip_radius_mm")?,
        num("trajectory_radius_mm")?,
        num("max_indentation_mm")?,
    )
    .map_err(|e| err(e.to_string()))?;
    let tactor_count: usize = get("tactor_count")?
        .parse()
        .map_err(|e| err(format!("tactor_count: {e}")))?;
    let params = ActuationParams::with_speed_cap(
        num("angular_velocity_rad_s")?,
        num("delay_fraction")?,
        tactor_count,
        num("spacing_mm")?,
        f64::INFINITY,
    )
    .map_err(|e| err(e.to_string()))?;
    let sense = match get("rotation")? {
        "positive" => RotationSense::Positive,
        "negative" => RotationSense::Negative,
        other => return Err(err(format!("unknown rotation {other:?}"))),
    };
    let options = ScheduleOptions {
        tick_rate: num("tick_rate_hz")?,
        pre_roll: num("pre_roll_s")?,
        post_roll: num("post_roll_s")?,
        sense,
    };
    let schedule = match get("motion")? {
        "stroke" => build_schedule_with(&geometry, &params, options),
        "hold" => hold_schedule(&geometry, &params, options),
        other => return Err(err(format!("unknown motion {other:?}"))),
    };
    schedule.map_err(|e| err(e.to_string()))
}

pub fn read_command_stream<R: BufRead>(input: R) -> Result<ImportedStream, StreamError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let io = |source| StreamError::Io {
        path: PathBuf::from("<stream>"),
        source,
    };
    let (_, first) = lines
        .next()
        .ok_or_else(|| StreamError::parse(1, "empty stream"))?;
    let schedule = parse_header(&first.map_err(io)?)?;
    let motors = schedule.motor_count();

    let mut columns: Option<usize> = None;
    let mut times = Vec::new();
    let mut data: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in lines {
        let line = line.map_err(io)?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let Some(width) = columns else {
            let names: Vec<&str> = line.split(',').collect();
            if names.first() != Some(&"t_s") {
                return Err(StreamError::parse(line_no, "expected column header"));
            }
            let width = names.len() - 1;
            if width != 2 * motors && width != 4 * motors {
                return Err(StreamError::parse(
                    line_no,
                    format!("{width} data columns do not fit {motors} motors"),
                ));
            }
            columns = Some(width);
            data = vec![Vec::with_capacity(schedule.sample_count()); width];
            continue;
        };
        let mut cells = line.split(',');
        let mut next = |what: &str| -> Result<f64, StreamError> {
            cells
                .next()
                .ok_or_else(|| StreamError::parse(line_no, format!("missing {what}")))?
                .parse::<f64>()
                .map_err(|e| StreamError::parse(line_no, format!("{what}: {e}")))
        };
        times.push(next("time")?);
        for (c, col) in data.iter_mut().enumerate().take(width) {
            col.push(next(&format!("column {}", c + 1))?);
        }
        if cells.next().is_some() {
            return Err(StreamError::parse(line_no, "too many columns"));
        }
    }
    if columns.is_none() {
        return Err(StreamError::parse(1, "missing column header"));
    }

    let mut chunks = data.chunks(motors.max(1)).map(<[Vec<f64>]>::to_vec);
    let angles = chunks.next().unwrap_or_default();
    let indentation = chunks.next().unwrap_or_default();
    let actual = chunks.next().unwrap_or_default();
    let error = chunks.next().unwrap_or_default();
    Ok(ImportedStream {
        schedule,
        times,
        angles,
        indentation,
        actual,
        error,
    })
}

pub fn import_command_stream(path: &Path) -> Result<ImportedStream, StreamError> {
    let file = File::open(path).map_err(|source| StreamError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_command_stream(BufReader::new(file)).map_err(|e| match e {
        StreamError::Io { source, .. } => StreamError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}
