use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::condition::{PatternCondition, CONDITION_COUNT};
use super::log::TrialRecord;
use super::StudyError;

/// Row-stochastic presented-vs-perceived matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<PatternCondition>,
    pub proportions: Vec<Vec<f64>>,
}

const ROW_SUM_TOL: f64 = 1e-6;

impl ConfusionMatrix {
    pub fn new(labels: Vec<PatternCondition>, proportions: Vec<Vec<f64>>) -> Result<Self, StudyError> {
        let k = labels.len();
        if proportions.len() != k || proportions.iter().any(|r| r.len() != k) {
            return Err(StudyError::IncompleteData("matrix shape does not match labels".into()));
        }
        for (label, row) in labels.iter().zip(&proportions) {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(StudyError::IncompleteData(format!(
                    "row {label} has entries outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(StudyError::IncompleteData(format!("row {label} sums to {sum}")));
            }
        }
        Ok(Self { labels, proportions })
    }

    pub fn identity(labels: Vec<PatternCondition>) -> Self {
        let k = labels.len();
        let proportions = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { labels, proportions }
    }

    pub fn get(&self, presented: PatternCondition, perceived: PatternCondition) -> Option<f64> {
        let i = self.labels.iter().position(|l| *l == presented)?;
        let j = self.labels.iter().position(|l| *l == perceived)?;
        Some(self.proportions[i][j])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.labels.len()).map(|i| self.proportions[i][i]).collect()
    }

    pub fn report(&self) -> String {
        let mut s = format!("{:<6}", "");
        for l in &self.labels {
            let _ = write!(s, "{:>6}", l.to_string());
        }
        s.push('\n');
        for (l, row) in self.labels.iter().zip(&self.proportions) {
            let _ = write!(s, "{:<6}", l.to_string());
            for p in row {
                if *p == 0.0 {
                    let _ = write!(s, "{:>6}", "-");
                } else {
                    let _ = write!(s, "{:>6.2}", p);
                }
            }
            s.push('\n');
        }
        s
    }

    /// `presented,perceived,proportion` rows with a header.
    pub fn rows(&self) -> String {
        let mut s = String::from("presented,perceived,proportion\n");
        for (a, row) in self.labels.iter().zip(&self.proportions) {
            for (b, p) in self.labels.iter().zip(row) {
                let _ = writeln!(s, "{a},{b},{p}");
            }
        }
        s
    }
}

/// Builds the 10x10 matrix in table order; every condition must have been presented.
pub fn confusion_matrix(records: &[TrialRecord]) -> Result<ConfusionMatrix, StudyError> {
    let mut counts = [[0u32; CONDITION_COUNT]; CONDITION_COUNT];
    for r in records {
        counts[r.presented.index()][r.perceived.index()] += 1;
    }
    let labels = PatternCondition::all().to_vec();
    let mut proportions = Vec::with_capacity(CONDITION_COUNT);
    for (label, row) in labels.iter().zip(&counts) {
        let total: u32 = row.iter().sum();
        if total == 0 {
            return Err(StudyError::IncompleteData(format!(
                "condition {label} was never presented"
            )));
        }
        proportions.push(row.iter().map(|&c| c as f64 / total as f64).collect());
    }
    ConfusionMatrix::new(labels, proportions)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRate {
    pub label: PatternCondition,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean_diagonal: f64,
    /// Highest diagonal entry; the earliest label wins ties.
    pub best: ClassRate,
    /// Lowest diagonal entry; the earliest label wins ties.
    pub worst: ClassRate,
}

pub fn summarize(matrix: &ConfusionMatrix) -> Summary {
    let diag = matrix.diagonal();
    let mean_diagonal = diag.iter().sum::<f64>() / diag.len() as f64;
    let mut best = 0;
    let mut worst = 0;
    for (i, &d) in diag.iter().enumerate() {
        if d > diag[best] {
            best = i;
        }
        if d < diag[worst] {
            worst = i;
        }
    }
    Summary {
        mean_diagonal,
        best: ClassRate {
            label: matrix.labels[best],
            rate: diag[best],
        },
        worst: ClassRate {
            label: matrix.labels[worst],
            rate: diag[worst],
        },
    }
}

impl Summary {
    pub fn report(&self) -> String {
        format!(
            "mean recognition {:.4}\nhighest {} {:.4}\nlowest {} {:.4}\n",
            self.mean_diagonal, self.best.label, self.best.rate, self.worst.label, self.worst.rate
        )
    }
}
