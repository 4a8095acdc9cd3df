//! Trial plans for the two stroke studies, rating collection, and rating statistics.

pub mod plan;
pub mod ratings;
pub mod stats;

use thiserror::Error;

pub use plan::{
    balanced_latin_square, generate_plan, generate_study1_plan, generate_study2_plan, Condition,
    Location, StudyId, Trial, TrialPlan,
};
pub use ratings::{read_log, run_session, write_log_line, RatingRecord};
pub use stats::{
    one_sample_t, pairwise_bonferroni, summarize, Factor, LabeledGroup, Measure, PairwiseMatrix,
    StatsError, TTest,
};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("{field} rating {value} is outside {min}..={max}")]
    OutOfRange {
        field: &'static str,
        value: i32,
        min: i32,
        max: i32,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("input closed before the session finished")]
    InputClosed,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl StudyError {
    pub(crate) fn malformed(line: usize, err: impl std::fmt::Display) -> Self {
        StudyError::Malformed {
            line,
            message: err.to_string(),
        }
    }
}
