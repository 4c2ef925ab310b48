use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::anova::RepeatedMeasures;
use super::condition::{PatternCondition, CONDITION_COUNT};
use super::log::TrialRecord;
use super::StudyError;

/// Per-participant recognition rate for each of the ten conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub participants: Vec<String>,
    /// `accuracy[participant][condition index]`.
    pub accuracy: Vec<[f64; CONDITION_COUNT]>,
}

impl AccuracyTable {
    /// Participants appear in first-seen order.
    pub fn from_records(records: &[TrialRecord]) -> Result<Self, StudyError> {
        let mut participants: Vec<String> = Vec::new();
        let mut correct: Vec<[u32; CONDITION_COUNT]> = Vec::new();
        let mut shown: Vec<[u32; CONDITION_COUNT]> = Vec::new();
        for r in records {
            let p = match participants.iter().position(|p| *p == r.participant_id) {
                Some(p) => p,
                None => {
                    participants.push(r.participant_id.clone());
                    correct.push([0; CONDITION_COUNT]);
                    shown.push([0; CONDITION_COUNT]);
                    participants.len() - 1
                }
            };
            let c = r.presented.index();
            shown[p][c] += 1;
            if r.correct() {
                correct[p][c] += 1;
            }
        }
        let mut accuracy = Vec::with_capacity(participants.len());
        for (p, name) in participants.iter().enumerate() {
            let mut row = [0.0; CONDITION_COUNT];
            for c in 0..CONDITION_COUNT {
                if shown[p][c] == 0 {
                    return Err(StudyError::Design(format!(
                        "participant {name} never saw {}",
                        PatternCondition::all()[c]
                    )));
                }
                row[c] = correct[p][c] as f64 / shown[p][c] as f64;
            }
            accuracy.push(row);
        }
        Ok(Self { participants, accuracy })
    }

    pub fn column(&self, condition: usize) -> Vec<f64> {
        self.accuracy.iter().map(|row| row[condition]).collect()
    }

    /// Subjects x 5 vibrations x 2 temperatures.
    pub fn to_repeated_measures(&self) -> Result<RepeatedMeasures, StudyError> {
        let cells: Vec<Vec<Vec<f64>>> = self
            .accuracy
            .iter()
            .map(|row| (0..5).map(|v| vec![row[v], row[5 + v]]).collect())
            .collect();
        RepeatedMeasures::new(&cells)
    }

    pub fn rows(&self) -> String {
        let mut s = String::from("participant");
        for c in PatternCondition::all() {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
        for (p, row) in self.participants.iter().zip(&self.accuracy) {
            s.push_str(p);
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}
