//! Trial plans for both studies: counts, block breaks and the spacing order per participant.
//!
//! Run with `cargo run --example study_plans`.

use slipstroke::study::{balanced_latin_square, generate_plan, StudyId};

fn main() {
    let plan = generate_plan(StudyId::DelaySweep, 7, 0);
    let breaks: Vec<usize> = plan
        .trials
        .iter()
        .filter(|t| t.break_after)
        .map(|t| t.index)
        .collect();
    println!(
        "study 1: {} trials, breaks after trials {breaks:?}",
        plan.trials.len()
    );
    for t in plan.trials.iter().take(3) {
        let c = &t.condition;
        println!(
            "  #{} omega {} d {} at {}",
            t.index,
            c.angular_velocity,
            c.delay_fraction,
            c.location.map_or("-", |l| l.as_str())
        );
    }

    println!("\nLatin square rows: {:?}", balanced_latin_square(4));
    for participant in 0..4 {
        let plan = generate_plan(StudyId::SpacingSweep, 7, participant);
        let mut order: Vec<f64> = Vec::new();
        for t in &plan.trials {
            if order.last() != Some(&t.condition.spacing_mm) {
                order.push(t.condition.spacing_mm);
            }
        }
        println!("study 2, participant {participant}: spacing order {order:?} mm");
    }

    let again = generate_plan(StudyId::DelaySweep, 7, 0);
    println!(
        "\nsame seed reproduces the plan: {}",
        again.to_jsonl() == plan.to_jsonl()
    );
}
