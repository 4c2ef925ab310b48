//! Recognition-study protocol and statistics: trial plans, response logs,
//! confusion matrices, repeated-measures ANOVA and paired comparisons.

mod accuracy;
mod anova;
mod condition;
mod confusion;
pub mod dist;
mod log;
mod plan;
mod ttest;

pub use accuracy::AccuracyTable;
pub use anova::{partial_eta_sq_from_f, rm_anova, AnovaMode, AnovaTable, EffectRow, RepeatedMeasures};
pub use condition::{PatternCondition, Thermal, CONDITION_COUNT};
pub use confusion::{confusion_matrix, summarize, ClassRate, ConfusionMatrix, Summary};
pub use dist::{f_survival, t_two_sided};
pub use log::{
    parse_log, read_log_file, trial_records, Ack, LogEntry, SessionHeader, SessionLog, SessionRecords, TrialRecord,
};
pub use plan::{generate_plan, TrialPlan, REPETITIONS, TRIALS_PER_SESSION};
pub use ttest::{bonferroni, paired_t, paired_t_tests, pairwise_report, pairwise_rows, PairedComparison};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("unknown condition {0:?}")]
    UnknownCondition(String),
    #[error("incomplete data: {0}")]
    IncompleteData(String),
    #[error("design error: {0}")]
    Design(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("out-of-order trial: expected index {expected}, got {got}")]
    Sequence { expected: usize, got: usize },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("session is complete")]
    SessionComplete,
    #[error("log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
