use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::plan::{Trial, TrialPlan};
use super::StudyError;

pub const CONTINUITY_RANGE: (i32, i32) = (1, 7);
pub const PLEASANTNESS_RANGE: (i32, i32) = (-7, 7);

/// One participant response. Continuity is 1 (discrete) to 7 (continuous); pleasantness is −7
/// (very unpleasant) to +7 (very pleasant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub participant: u32,
    pub trial: Trial,
    pub continuity: i32,
    pub pleasantness: i32,
    /// Unix seconds.
    pub timestamp: u64,
}

fn check(field: &'static str, value: i32, (lo, hi): (i32, i32)) -> Result<(), StudyError> {
    if (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(StudyError::OutOfRange {
            field,
            value,
            min: lo,
            max: hi,
        })
    }
}

impl RatingRecord {
    pub fn new(
        trial: Trial,
        continuity: i32,
        pleasantness: i32,
        timestamp: u64,
    ) -> Result<Self, StudyError> {
        let record = Self {
            participant: trial.participant,
            trial,
            continuity,
            pleasantness,
            timestamp,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        check("continuity", self.continuity, CONTINUITY_RANGE)?;
        check("pleasantness", self.pleasantness, PLEASANTNESS_RANGE)
    }
}

pub fn write_log_line<W: Write>(out: &mut W, record: &RatingRecord) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}

/// Reads a rating log, validating every record. Errors name the offending line.
pub fn read_log<R: BufRead>(input: R) -> Result<Vec<RatingRecord>, StudyError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| StudyError::malformed(line_no, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let record: RatingRecord =
            serde_json::from_str(&line).map_err(|e| StudyError::malformed(line_no, e))?;
        record
            .validate()
            .map_err(|e| StudyError::malformed(line_no, e))?;
        records.push(record);
    }
    Ok(records)
}

fn prompt<R: BufRead, W: Write>(
    input: &mut R,
    out: &mut W,
    label: &str,
    field: &'static str,
    range: (i32, i32),
) -> Result<i32, StudyError> {
    loop {
        write!(out, "{label} [{}..{}]: ", range.0, range.1)?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Err(StudyError::InputClosed);
        }
        match line.trim().parse::<i32>() {
            Ok(v) => match check(field, v, range) {
                Ok(()) => return Ok(v),
                Err(e) => writeln!(out, "  {e}; try again")?,
            },
            Err(_) => writeln!(out, "  {:?} is not a whole number; try again", line.trim())?,
        }
    }
}

/// Steps through `plan`, printing `describe(trial)` and collecting both ratings for each trial.
/// Invalid answers are re-prompted; every completed record is handed to `sink` immediately.
pub fn run_session<R, W, D, C, S>(
    plan: &TrialPlan,
    input: &mut R,
    out: &mut W,
    mut describe: D,
    mut clock: C,
    mut sink: S,
) -> Result<Vec<RatingRecord>, StudyError>
where
    R: BufRead,
    W: Write,
    D: FnMut(&Trial) -> String,
    C: FnMut() -> u64,
    S: FnMut(&RatingRecord) -> std::io::Result<()>,
{
    let mut records = Vec::with_capacity(plan.trials.len());
    let total = plan.trials.len();
    for trial in &plan.trials {
        writeln!(
            out,
            "trial {}/{} (block {}): {}",
            trial.index + 1,
            total,
            trial.block + 1,
            describe(trial)
        )?;
        let continuity = prompt(
            input,
            out,
            "continuity (1=discrete, 7=continuous)",
            "continuity",
            CONTINUITY_RANGE,
        )?;
        let pleasantness = prompt(
            input,
            out,
            "pleasantness (-7=very unpleasant, 0=neutral, 7=very pleasant)",
            "pleasantness",
            PLEASANTNESS_RANGE,
        )?;
        let record = RatingRecord::new(*trial, continuity, pleasantness, clock())?;
        sink(&record)?;
        records.push(record);
        if trial.break_after {
            writeln!(out, "-- break: end of block {} --", trial.block + 1)?;
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::plan::generate_study2_plan;

    #[test]
    fn validation_names_the_field() {
        let trial = generate_study2_plan(1, 0).trials[0];
        let err = RatingRecord::new(trial, 8, 0, 0).unwrap_err();
        assert!(err.to_string().contains("continuity"));
        let err = RatingRecord::new(trial, 4, -8, 0).unwrap_err();
        assert!(err.to_string().contains("pleasantness"));
        assert!(RatingRecord::new(trial, 1, -7, 0).is_ok());
        assert!(RatingRecord::new(trial, 7, 7, 0).is_ok());
        assert!(RatingRecord::new(trial, 0, 0, 0).is_err());
    }

    #[test]
    fn session_reprompts_until_valid() {
        let mut plan = generate_study2_plan(3, 1);
        plan.trials.truncate(2);
        let answers = "9\nfoo\n5\n-9\n3\n7\n-7\n";
        let mut input = answers.as_bytes();
        let mut out = Vec::new();
        let mut log = Vec::new();
        let records = run_session(
            &plan,
            &mut input,
            &mut out,
            |t| format!("omega {}", t.condition.angular_velocity),
            || 42,
            |r| write_log_line(&mut log, r),
        )
        .unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!((records[0].continuity, records[0].pleasantness), (5, 3));
        assert_eq!((records[1].continuity, records[1].pleasantness), (7, -7));
        let transcript = String::from_utf8(out).unwrap();
        assert!(
            transcript.contains("continuity rating 9 is outside"),
            "{transcript}"
        );
        assert!(transcript.contains("not a whole number"));
        assert_eq!(read_log(log.as_slice()).unwrap(), records);
    }

    #[test]
    fn session_stops_on_eof() {
        let plan = generate_study2_plan(3, 1);
        let mut input = "4\n".as_bytes();
        let err = run_session(
            &plan,
            &mut input,
            &mut Vec::new(),
            |_| String::new(),
            || 0,
            |_| Ok(()),
        )
        .unwrap_err();
        assert!(matches!(err, StudyError::InputClosed));
    }

    #[test]
    fn log_errors_report_line_numbers() {
        let trial = generate_study2_plan(1, 0).trials[0];
        let good = RatingRecord::new(trial, 4, 1, 5).unwrap();
        let mut log = Vec::new();
        write_log_line(&mut log, &good).unwrap();
        let mut bad = good;
        bad.continuity = 12;
        write_log_line(&mut log, &bad).unwrap();
        let err = read_log(log.as_slice()).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.starts_with("line 2:") && msg.contains("continuity"),
            "{msg}"
        );
        let err = read_log("\n{not json\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 2:"));
    }
}
