use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::condition::{PatternCondition, CONDITION_COUNT};

/// Presentations of each condition per participant.
pub const REPETITIONS: usize = 5;
pub const TRIALS_PER_SESSION: usize = CONDITION_COUNT * REPETITIONS;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub participant_id: String,
    pub seed: u64,
    pub trials: Vec<PatternCondition>,
}

/// Balanced plan: every condition five times, Fisher-Yates shuffled with a
/// ChaCha8 stream seeded from `seed`. The order depends on the seed only.
pub fn generate_plan(participant_id: &str, seed: u64) -> TrialPlan {
    let mut trials: Vec<PatternCondition> = (0..REPETITIONS).flat_map(|_| PatternCondition::all()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..trials.len()).rev() {
        let j = rng.random_range(0..=i);
        trials.swap(i, j);
    }
    TrialPlan {
        participant_id: participant_id.to_string(),
        seed,
        trials,
    }
}

impl TrialPlan {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    /// Count of each condition in table order.
    pub fn condition_counts(&self) -> [usize; CONDITION_COUNT] {
        let mut counts = [0; CONDITION_COUNT];
        for c in &self.trials {
            counts[c.index()] += 1;
        }
        counts
    }
}
