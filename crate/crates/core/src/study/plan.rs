use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StudyError;
use crate::kinematics::{
    study_angular_velocities, ActuationParams, AngularVelocity, KinematicsError,
    STUDY_DELAY_FRACTIONS,
};

pub const STUDY1_TACTORS: usize = 5;
pub const STUDY1_SPACING_MM: f64 = 20.0;
pub const STUDY1_BLOCK_LEN: usize = 30;
pub const STUDY2_TACTORS: usize = 4;
pub const STUDY2_DELAY: f64 = 0.10;
pub const STUDY2_SPACINGS_MM: [f64; 4] = [20.0, 30.0, 35.0, 40.0];
pub const REPETITIONS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Volar,
    Dorsal,
}

impl Location {
    pub fn as_str(self) -> &'static str {
        match self {
            Location::Volar => "volar",
            Location::Dorsal => "dorsal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum StudyId {
    /// Delay × angular velocity on two forearm locations.
    DelaySweep,
    /// Contact spacing × angular velocity at a fixed delay.
    SpacingSweep,
}

impl TryFrom<u8> for StudyId {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(StudyId::DelaySweep),
            2 => Ok(StudyId::SpacingSweep),
            other => Err(format!("unknown study id {other}, expected 1 or 2")),
        }
    }
}

impl From<StudyId> for u8 {
    fn from(id: StudyId) -> u8 {
        match id {
            StudyId::DelaySweep => 1,
            StudyId::SpacingSweep => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub angular_velocity: AngularVelocity,
    pub delay_fraction: f64,
    pub tactor_count: usize,
    pub spacing_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

impl Condition {
    pub fn params(&self) -> Result<ActuationParams, KinematicsError> {
        ActuationParams::new(
            self.angular_velocity.value(),
            self.delay_fraction,
            self.tactor_count,
            self.spacing_mm,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub study: StudyId,
    pub seed: u64,
    pub participant: u32,
    pub index: usize,
    pub block: usize,
    pub repetition: usize,
    pub condition: Condition,
    /// A rest break follows this trial.
    #[serde(default)]
    pub break_after: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub study: StudyId,
    pub seed: u64,
    pub participant: u32,
    pub trials: Vec<Trial>,
}

fn participant_rng(seed: u64, participant: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(participant as u64);
    rng
}

/// Row `r` of the column-balanced Latin square: `(first[j] + r) mod n` with first row
/// `0, 1, n−1, 2, n−2, …`. For even `n` every level precedes every other equally often.
pub fn balanced_latin_square(n: usize) -> Vec<Vec<usize>> {
    let mut first = Vec::with_capacity(n);
    let (mut lo, mut hi) = (1usize, n.saturating_sub(1));
    if n > 0 {
        first.push(0);
    }
    for j in 1..n {
        if j % 2 == 1 {
            first.push(lo);
            lo += 1;
        } else {
            first.push(hi);
            hi -= 1;
        }
    }
    (0..n)
        .map(|r| first.iter().map(|&c| (c + r) % n).collect())
        .collect()
}

fn finish(study: StudyId, seed: u64, participant: u32, mut trials: Vec<Trial>) -> TrialPlan {
    let last = trials.len().saturating_sub(1);
    for i in 0..trials.len() {
        trials[i].index = i;
        trials[i].break_after = i != last && trials[i + 1].block != trials[i].block;
    }
    TrialPlan {
        study,
        seed,
        participant,
        trials,
    }
}

/// 120 trials: every (ω, d) pair twice per location, all of one location first. Even participant
/// indices start on the volar forearm.
pub fn generate_study1_plan(seed: u64, participant: u32) -> TrialPlan {
    let mut rng = participant_rng(seed, participant);
    let locations = if participant.is_multiple_of(2) {
        [Location::Volar, Location::Dorsal]
    } else {
        [Location::Dorsal, Location::Volar]
    };
    let mut trials = Vec::with_capacity(120);
    for location in locations {
        let mut chunk = Vec::with_capacity(60);
        for repetition in 0..REPETITIONS {
            for &delay_fraction in &STUDY_DELAY_FRACTIONS {
                for angular_velocity in study_angular_velocities() {
                    chunk.push(Trial {
                        study: StudyId::DelaySweep,
                        seed,
                        participant,
                        index: 0,
                        block: 0,
                        repetition,
                        condition: Condition {
                            angular_velocity,
                            delay_fraction,
                            tactor_count: STUDY1_TACTORS,
                            spacing_mm: STUDY1_SPACING_MM,
                            location: Some(location),
                        },
                        break_after: false,
                    });
                }
            }
        }
        chunk.shuffle(&mut rng);
        trials.extend(chunk);
    }
    for (i, t) in trials.iter_mut().enumerate() {
        t.block = i / STUDY1_BLOCK_LEN;
    }
    finish(StudyId::DelaySweep, seed, participant, trials)
}

/// 40 trials in four spacing sets of ten; set order is row `participant mod 4` of
/// [`balanced_latin_square`].
pub fn generate_study2_plan(seed: u64, participant: u32) -> TrialPlan {
    let mut rng = participant_rng(seed, participant);
    let square = balanced_latin_square(STUDY2_SPACINGS_MM.len());
    let row = &square[participant as usize % square.len()];
    let mut trials = Vec::with_capacity(40);
    for (block, &level) in row.iter().enumerate() {
        let spacing_mm = STUDY2_SPACINGS_MM[level];
        let mut set = Vec::with_capacity(10);
        for repetition in 0..REPETITIONS {
            for angular_velocity in study_angular_velocities() {
                set.push(Trial {
                    study: StudyId::SpacingSweep,
                    seed,
                    participant,
                    index: 0,
                    block,
                    repetition,
                    condition: Condition {
                        angular_velocity,
                        delay_fraction: STUDY2_DELAY,
                        tactor_count: STUDY2_TACTORS,
                        spacing_mm,
                        location: Some(Location::Volar),
                    },
                    break_after: false,
                });
            }
        }
        set.shuffle(&mut rng);
        trials.extend(set);
    }
    finish(StudyId::SpacingSweep, seed, participant, trials)
}

pub fn generate_plan(study: StudyId, seed: u64, participant: u32) -> TrialPlan {
    match study {
        StudyId::DelaySweep => generate_study1_plan(seed, participant),
        StudyId::SpacingSweep => generate_study2_plan(seed, participant),
    }
}

impl TrialPlan {
    /// One JSON object per trial per line.
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for t in &self.trials {
            serde_json::to_writer(&mut *out, t)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, StudyError> {
        let mut trials: Vec<Trial> = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| StudyError::malformed(line_no, e))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let trial: Trial =
                serde_json::from_str(&line).map_err(|e| StudyError::malformed(line_no, e))?;
            if let Some(first) = trials.first() {
                if (trial.study, trial.seed, trial.participant)
                    != (first.study, first.seed, first.participant)
                {
                    return Err(StudyError::malformed(
                        line_no,
                        "trial belongs to a different plan than the first line",
                    ));
                }
            }
            trials.push(trial);
        }
        let first = trials
            .first()
            .ok_or_else(|| StudyError::malformed(1, "plan has no trials"))?;
        Ok(TrialPlan {
            study: first.study,
            seed: first.seed,
            participant: first.participant,
            trials,
        })
    }
}
