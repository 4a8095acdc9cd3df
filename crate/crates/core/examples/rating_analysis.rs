//! Simulated rating session for three participants followed by the analysis report.
//!
//! Run with `cargo run --example rating_analysis`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slipstroke::cli::write_analysis;
use slipstroke::study::{generate_plan, run_session, RatingRecord, StudyId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut records: Vec<RatingRecord> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for participant in 0..3 {
        let plan = generate_plan(StudyId::DelaySweep, 42, participant);
        // Synthetic rater: slower strokes feel more continuous.
        let answers: String = plan
            .trials
            .iter()
            .map(|t| {
                let d = t.condition.delay_fraction;
                let continuity = (6.5 - 16.0 * d + rng.gen_range(-1.0..1.0))
                    .round()
                    .clamp(1.0, 7.0);
                let pleasant = (2.0 - 8.0 * d + rng.gen_range(-2.0..2.0))
                    .round()
                    .clamp(-7.0, 7.0);
                format!("{continuity}\n{pleasant}\n")
            })
            .collect();
        let session = run_session(
            &plan,
            &mut answers.as_bytes(),
            &mut std::io::sink(),
            |_| String::new(),
            || 0,
            |_| Ok(()),
        )?;
        records.extend(session);
    }
    write_analysis(&records, &mut std::io::stdout().lock())?;
    Ok(())
}
