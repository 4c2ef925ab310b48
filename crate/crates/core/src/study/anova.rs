//! Repeated-measures ANOVA for fully within-subject designs.
//!
//! Factorial mode partitions a subjects x A x B table into
//!
//! ```text
//! SS_total = SS_subject + SS_A + SS_AxS + SS_B + SS_BxS + SS_AB + SS_ABxS
//! ```
//!
//! and tests each effect against its own subject-interaction error term.
//! Single-factor mode flattens the A x B cells into one factor with `a*b`
//! levels.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dist::f_survival;
use super::StudyError;

/// Balanced subjects x A x B table of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedMeasures {
    subjects: usize,
    levels_a: usize,
    levels_b: usize,
    values: Vec<f64>,
}

impl RepeatedMeasures {
    /// `cells[subject][a][b]`.
    pub fn new(cells: &[Vec<Vec<f64>>]) -> Result<Self, StudyError> {
        let subjects = cells.len();
        if subjects < 2 {
            return Err(StudyError::Design(format!("need at least 2 subjects, got {subjects}")));
        }
        let levels_a = cells[0].len();
        let levels_b = cells[0].first().map_or(0, Vec::len);
        if levels_a < 2 || levels_b < 1 {
            return Err(StudyError::Design(
                "factor A needs >= 2 levels and factor B >= 1".into(),
            ));
        }
        let mut values = Vec::with_capacity(subjects * levels_a * levels_b);
        for (s, subject) in cells.iter().enumerate() {
            if subject.len() != levels_a || subject.iter().any(|row| row.len() != levels_b) {
                return Err(StudyError::Design(format!("subject {s} has missing or extra cells")));
            }
            for &v in subject.iter().flatten() {
                if !v.is_finite() {
                    return Err(StudyError::Design(format!("subject {s} has a non-finite value")));
                }
                values.push(v);
            }
        }
        Ok(Self {
            subjects,
            levels_a,
            levels_b,
            values,
        })
    }

    pub fn subjects(&self) -> usize {
        self.subjects
    }

    pub fn levels(&self) -> (usize, usize) {
        (self.levels_a, self.levels_b)
    }

    pub fn get(&self, s: usize, i: usize, j: usize) -> f64 {
        self.values[(s * self.levels_a + i) * self.levels_b + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnovaMode {
    /// Two within-subject factors: vibration (a-1, (a-1)(n-1)), temperature
    /// (b-1, (b-1)(n-1)) and their interaction.
    Factorial,
    /// All `a*b` cells as one within-subject factor: (ab-1, (ab-1)(n-1)).
    SingleFactor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRow {
    pub name: String,
    pub ss_effect: f64,
    pub ss_error: f64,
    pub df_effect: usize,
    pub df_error: usize,
    pub f: f64,
    pub p: f64,
    pub partial_eta_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub mode: AnovaMode,
    pub subjects: usize,
    pub ss_subject: f64,
    pub ss_total: f64,
    pub effects: Vec<EffectRow>,
}

impl AnovaTable {
    pub fn effect(&self, name: &str) -> Option<&EffectRow> {
        self.effects.iter().find(|e| e.name == name)
    }

    /// `SS_subject` plus every effect and error sum of squares.
    pub fn component_sum(&self) -> f64 {
        self.ss_subject + self.effects.iter().map(|e| e.ss_effect + e.ss_error).sum::<f64>()
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<12} {:>10} {:>10} {:>4} {:>4} {:>9} {:>8} {:>8}",
            "effect", "SS", "SS_err", "df1", "df2", "F", "p", "eta_p2"
        );
        for e in &self.effects {
            let _ = writeln!(
                s,
                "{:<12} {:>10.6} {:>10.6} {:>4} {:>4} {:>9.4} {:>8.4} {:>8.6}",
                e.name, e.ss_effect, e.ss_error, e.df_effect, e.df_error, e.f, e.p, e.partial_eta_sq
            );
        }
        let _ = writeln!(
            s,
            "subjects {}  SS_subject {:.6}  SS_total {:.6}",
            self.subjects, self.ss_subject, self.ss_total
        );
        s
    }

    pub fn rows(&self) -> String {
        let mut s = String::from("effect,ss_effect,ss_error,df_effect,df_error,f,p,partial_eta_sq\n");
        for e in &self.effects {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                e.name, e.ss_effect, e.ss_error, e.df_effect, e.df_error, e.f, e.p, e.partial_eta_sq
            );
        }
        s
    }
}

fn effect_row(
    name: &str,
    ss_effect: f64,
    ss_error: f64,
    df_effect: usize,
    df_error: usize,
) -> Result<EffectRow, StudyError> {
    let (f, p, partial_eta_sq) = if ss_effect == 0.0 {
        (0.0, 1.0, 0.0)
    } else if ss_error == 0.0 {
        (f64::INFINITY, 0.0, 1.0)
    } else {
        let f = (ss_effect / df_effect as f64) / (ss_error / df_error as f64);
        (
            f,
            f_survival(f, df_effect as f64, df_error as f64)?,
            ss_effect / (ss_effect + ss_error),
        )
    };
    Ok(EffectRow {
        name: name.to_string(),
        ss_effect,
        ss_error,
        df_effect,
        df_error,
        f,
        p,
        partial_eta_sq,
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let mut n = 0usize;
    let mut sum = 0.0;
    for x in xs {
        sum += x;
        n += 1;
    }
    sum / n as f64
}

// index loops mirror the sums of squares term by term
#[allow(clippy::needless_range_loop)]
pub fn rm_anova(data: &RepeatedMeasures, mode: AnovaMode) -> Result<AnovaTable, StudyError> {
    let n = data.subjects;
    let (a, b) = data.levels();
    if mode == AnovaMode::Factorial && b < 2 {
        return Err(StudyError::Design(
            "factorial mode needs factor B with >= 2 levels".into(),
        ));
    }
    let y = |s, i, j| data.get(s, i, j);
    let grand = mean(data.values.iter().copied());
    // sums of squares below this are rounding noise from averaging equal values
    let noise = 1e-13 * data.values.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    let clean = |ss: f64| if ss <= noise { 0.0 } else { ss };

    let m_s: Vec<f64> = (0..n)
        .map(|s| mean((0..a).flat_map(|i| (0..b).map(move |j| y(s, i, j)))))
        .collect();
    let ss_total = data.values.iter().map(|v| (v - grand).powi(2)).sum::<f64>();
    let ss_subject = (a * b) as f64 * m_s.iter().map(|m| (m - grand).powi(2)).sum::<f64>();

    let effects = match mode {
        AnovaMode::SingleFactor => {
            let k = a * b;
            let cell = |s: usize, c: usize| y(s, c / b, c % b);
            let m_c: Vec<f64> = (0..k).map(|c| mean((0..n).map(|s| cell(s, c)))).collect();
            let ss_cond = n as f64 * m_c.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
            let mut ss_err = 0.0;
            for s in 0..n {
                for (c, mc) in m_c.iter().enumerate() {
                    ss_err += (cell(s, c) - mc - m_s[s] + grand).powi(2);
                }
            }
            vec![effect_row(
                "condition",
                clean(ss_cond),
                clean(ss_err),
                k - 1,
                (k - 1) * (n - 1),
            )?]
        }
        AnovaMode::Factorial => {
            let m_a: Vec<f64> = (0..a)
                .map(|i| mean((0..n).flat_map(|s| (0..b).map(move |j| y(s, i, j)))))
                .collect();
            let m_b: Vec<f64> = (0..b)
                .map(|j| mean((0..n).flat_map(|s| (0..a).map(move |i| y(s, i, j)))))
                .collect();
            let m_ab = |i: usize, j: usize| mean((0..n).map(|s| y(s, i, j)));
            let m_sa = |s: usize, i: usize| mean((0..b).map(|j| y(s, i, j)));
            let m_sb = |s: usize, j: usize| mean((0..a).map(|i| y(s, i, j)));

            let ss_a = (n * b) as f64 * m_a.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
            let ss_b = (n * a) as f64 * m_b.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
            let (mut ss_ab, mut ss_as, mut ss_bs, mut ss_abs) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..a {
                for j in 0..b {
                    ss_ab += n as f64 * (m_ab(i, j) - m_a[i] - m_b[j] + grand).powi(2);
                }
            }
            for s in 0..n {
                for i in 0..a {
                    ss_as += b as f64 * (m_sa(s, i) - m_s[s] - m_a[i] + grand).powi(2);
                }
                for j in 0..b {
                    ss_bs += a as f64 * (m_sb(s, j) - m_s[s] - m_b[j] + grand).powi(2);
                }
                for i in 0..a {
                    for j in 0..b {
                        let r = y(s, i, j) - m_sa(s, i) - m_sb(s, j) - m_ab(i, j) + m_s[s] + m_a[i] + m_b[j] - grand;
                        ss_abs += r * r;
                    }
                }
            }
            let (dfa, dfb, dfn) = (a - 1, b - 1, n - 1);
            vec![
                effect_row("vibration", clean(ss_a), clean(ss_as), dfa, dfa * dfn)?,
                effect_row("temperature", clean(ss_b), clean(ss_bs), dfb, dfb * dfn)?,
                effect_row("interaction", clean(ss_ab), clean(ss_abs), dfa * dfb, dfa * dfb * dfn)?,
            ]
        }
    };
    Ok(AnovaTable {
        mode,
        subjects: n,
        ss_subject: clean(ss_subject),
        ss_total: clean(ss_total),
        effects,
    })
}

/// Partial eta squared recovered from a reported F statistic.
pub fn partial_eta_sq_from_f(f: f64, df_effect: f64, df_error: f64) -> f64 {
    f * df_effect / (f * df_effect + df_error)
}
