use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::accuracy::AccuracyTable;
use super::condition::{PatternCondition, CONDITION_COUNT};
use super::dist::t_two_sided;
use super::StudyError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub first: PatternCondition,
    pub second: PatternCondition,
    /// `None` when every paired difference is identical (zero variance).
    pub t: Option<f64>,
    pub p_raw: Option<f64>,
    pub p_bonferroni: Option<f64>,
    pub degenerate: bool,
}

pub fn bonferroni(p_raw: f64, comparisons: usize) -> f64 {
    (p_raw * comparisons as f64).min(1.0)
}

/// Paired t statistic and two-sided p for `x - y`; `None` if the differences have zero variance.
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<Option<(f64, f64)>, StudyError> {
    if x.len() != y.len() {
        return Err(StudyError::Design("paired samples differ in length".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(StudyError::Design("paired t-test needs at least 2 subjects".into()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var <= 1e-24 {
        return Ok(None);
    }
    let t = mean / (var / n as f64).sqrt();
    Ok(Some((t, t_two_sided(t, (n - 1) as f64)?)))
}

/// All 45 condition pairs, Bonferroni-corrected by the number of pairs.
pub fn paired_t_tests(table: &AccuracyTable) -> Result<Vec<PairedComparison>, StudyError> {
    let labels = PatternCondition::all();
    let pairs: Vec<(usize, usize)> = (0..CONDITION_COUNT)
        .flat_map(|i| (i + 1..CONDITION_COUNT).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    pairs
        .into_iter()
        .map(|(i, j)| {
            let result = paired_t(&table.column(i), &table.column(j))?;
            Ok(PairedComparison {
                first: labels[i],
                second: labels[j],
                t: result.map(|r| r.0),
                p_raw: result.map(|r| r.1),
                p_bonferroni: result.map(|r| bonferroni(r.1, m)),
                degenerate: result.is_none(),
            })
        })
        .collect()
}

pub fn pairwise_report(results: &[PairedComparison]) -> String {
    let mut s = format!("{:<6} {:<6} {:>8} {:>8} {:>8}\n", "a", "b", "t", "p", "p_bonf");
    for r in results {
        match (r.t, r.p_raw, r.p_bonferroni) {
            (Some(t), Some(p), Some(pb)) => {
                let _ = writeln!(
                    s,
                    "{:<6} {:<6} {:>8.3} {:>8.4} {:>8.3}",
                    r.first.to_string(),
                    r.second.to_string(),
                    t,
                    p,
                    pb
                );
            }
            _ => {
                let _ = writeln!(
                    s,
                    "{:<6} {:<6} degenerate (zero-variance differences)",
                    r.first.to_string(),
                    r.second.to_string()
                );
            }
        }
    }
    s
}

pub fn pairwise_rows(results: &[PairedComparison]) -> String {
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = String::from("first,second,t,p_raw,p_bonferroni,degenerate\n");
    for r in results {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.first,
            r.second,
            fmt(r.t),
            fmt(r.p_raw),
            fmt(r.p_bonferroni),
            r.degenerate
        );
    }
    s
}
