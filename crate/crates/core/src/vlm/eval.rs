use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::VlmError;

/// Margin within which a prediction counts as correct.
pub const DEFAULT_TOLERANCE_C: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalCase {
    pub predicted_c: f64,
    pub actual_c: f64,
    pub abs_error_c: f64,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceEvaluation {
    pub cases: Vec<EvalCase>,
    pub tolerance_c: f64,
    pub correct: usize,
    pub accuracy: f64,
}

/// Scores `(predicted, actual)` pairs; the tolerance boundary counts as correct.
pub fn evaluate_tolerance(cases: &[(f64, f64)], tolerance_c: f64) -> Result<ToleranceEvaluation, VlmError> {
    if cases.is_empty() {
        return Err(VlmError::EmptyEvaluation);
    }
    if !(tolerance_c > 0.0 && tolerance_c.is_finite()) {
        return Err(VlmError::InvalidTolerance(tolerance_c));
    }
    let cases: Vec<EvalCase> = cases
        .iter()
        .map(|&(predicted_c, actual_c)| {
            let abs_error_c = (predicted_c - actual_c).abs();
            EvalCase {
                predicted_c,
                actual_c,
                abs_error_c,
                correct: abs_error_c <= tolerance_c,
            }
        })
        .collect();
    let correct = cases.iter().filter(|c| c.correct).count();
    Ok(ToleranceEvaluation {
        accuracy: correct as f64 / cases.len() as f64,
        correct,
        cases,
        tolerance_c,
    })
}

/// Reads `predicted,actual` lines.
pub fn parse_eval_cases(text: &str) -> Result<Vec<(f64, f64)>, VlmError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| VlmError::Input { line: i + 1, message };
        let (p, a) = line
            .split_once(',')
            .ok_or_else(|| bad("expected predicted,actual".into()))?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad predicted value {p:?}")))?;
        let a: f64 = a.trim().parse().map_err(|_| bad(format!("bad actual value {a:?}")))?;
        out.push((p, a));
    }
    Ok(out)
}

impl ToleranceEvaluation {
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>4}  {:>10}  {:>10}  {:>9}  correct",
            "case", "predicted", "actual", "abs_err"
        );
        for (i, c) in self.cases.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:>4}  {:>10.2}  {:>10.2}  {:>9.2}  {}",
                i + 1,
                c.predicted_c,
                c.actual_c,
                c.abs_error_c,
                if c.correct { "yes" } else { "no" }
            );
        }
        let _ = writeln!(
            s,
            "accuracy {}/{} = {:.4} (tolerance {} °C)",
            self.correct,
            self.cases.len(),
            self.accuracy,
            self.tolerance_c
        );
        s
    }

    /// `index,predicted,actual,abs_error,correct` rows with a header.
    pub fn rows(&self) -> String {
        let mut s = String::from("index,predicted_c,actual_c,abs_error_c,correct\n");
        for (i, c) in self.cases.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                i, c.predicted_c, c.actual_c, c.abs_error_c, c.correct
            );
        }
        s
    }
}
