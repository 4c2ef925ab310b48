//! Writes the nine-participant recognition-study logs under `fixtures/study/`.
//!
//! Aggregate response counts reproduce the reference confusion table (45
//! presentations per condition). Per-participant correct counts were chosen so
//! the accuracy data carries a modest temperature effect; errors are handed out
//! in participant order, on the last presentations of each condition.
//!
//!     cargo run --example study_fixture [out_dir]

use std::path::PathBuf;

use hapticvlm::study::{generate_plan, PatternCondition, SessionHeader, SessionLog, TrialRecord, CONDITION_COUNT};

/// Response counts per presented condition, in table order.
const RESPONSES: [&[(&str, u32)]; CONDITION_COUNT] = [
    &[("WC-h", 45)],
    &[("GT-h", 42), ("WS-h", 3)],
    &[("GT-h", 2), ("WS-h", 37), ("FR-h", 3), ("WS-c", 1), ("MW-c", 2)],
    &[("WS-h", 1), ("FR-h", 36), ("MW-h", 7), ("FR-c", 1)],
    &[("WC-h", 4), ("FR-h", 3), ("MW-h", 36), ("WS-c", 1), ("FR-c", 1)],
    &[("WC-h", 3), ("WC-c", 42)],
    &[("GT-h", 2), ("WC-c", 1), ("GT-c", 36), ("WS-c", 6)],
    &[("WS-h", 4), ("FR-h", 1), ("WS-c", 35), ("FR-c", 3), ("MW-c", 2)],
    &[("FR-h", 1), ("GT-c", 1), ("WS-c", 3), ("FR-c", 34), ("MW-c", 6)],
    &[("MW-h", 2), ("WS-c", 1), ("FR-c", 4), ("MW-c", 38)],
];

/// Correct answers out of five, per participant and condition.
const CORRECT: [[usize; CONDITION_COUNT]; 9] = [
    [5, 5, 5, 5, 5, 5, 3, 5, 3, 5],
    [5, 5, 3, 5, 5, 5, 5, 5, 5, 5],
    [5, 4, 2, 2, 2, 5, 3, 2, 1, 3],
    [5, 5, 3, 5, 5, 4, 5, 2, 5, 5],
    [5, 5, 5, 5, 3, 4, 2, 4, 5, 5],
    [5, 5, 5, 4, 4, 5, 5, 5, 5, 3],
    [5, 5, 5, 4, 5, 4, 5, 3, 3, 5],
    [5, 3, 4, 3, 3, 5, 4, 5, 3, 3],
    [5, 5, 5, 3, 4, 5, 4, 4, 4, 4],
];

pub const BASE_SEED: u64 = 20_250_101;
const START_MS: u64 = 1_735_725_600_000;
const TRIAL_MS: u64 = 6_000;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/study"));
    std::fs::create_dir_all(&out)?;
    let labels = PatternCondition::all();

    // wrong answers still to hand out, per presented condition
    let mut wrong: Vec<Vec<PatternCondition>> = Vec::new();
    for (c, row) in RESPONSES.iter().enumerate() {
        let mut list = Vec::new();
        for &(label, n) in row.iter() {
            let label: PatternCondition = label.parse()?;
            if label != labels[c] {
                list.extend(std::iter::repeat_n(label, n as usize));
            }
        }
        wrong.push(list);
    }

    for (p, correct) in CORRECT.iter().enumerate() {
        let participant = format!("p{:02}", p + 1);
        let seed = BASE_SEED + p as u64 + 1;
        let plan = generate_plan(&participant, seed);
        let session_id = format!("fixture-{participant}");
        let created_ms = START_MS + p as u64 * 3_600_000;
        let path = out.join(format!("{participant}.jsonl"));
        if path.exists() {
            std::fs::remove_file(&path)?;
        }
        let mut log = SessionLog::create(
            &path,
            SessionHeader {
                session_id: session_id.clone(),
                participant_id: participant.clone(),
                seed,
                created_ms,
            },
        )?;
        let mut seen = [0usize; CONDITION_COUNT];
        for (i, &presented) in plan.trials.iter().enumerate() {
            let c = presented.index();
            seen[c] += 1;
            let perceived = if seen[c] <= correct[c] {
                presented
            } else {
                wrong[c].remove(0)
            };
            log.append(TrialRecord {
                session_id: session_id.clone(),
                participant_id: participant.clone(),
                trial_index: i,
                presented,
                perceived,
                timestamp_ms: created_ms + (i as u64 + 1) * TRIAL_MS,
            })?;
        }
        println!("{}", path.display());
    }
    if let Some(c) = wrong.iter().position(|w| !w.is_empty()) {
        return Err(format!("{} wrong answers left over for {}", wrong[c].len(), labels[c]).into());
    }
    Ok(())
}
