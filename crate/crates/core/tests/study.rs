mod common;

use common::{fixture, SplitMix};
use hapticvlm::study::{
    confusion_matrix, generate_plan, paired_t_tests, parse_log, rm_anova, summarize, trial_records, AccuracyTable,
    AnovaMode, LogEntry, PatternCondition, SessionHeader, SessionLog, StudyError, TrialRecord, CONDITION_COUNT,
    REPETITIONS, TRIALS_PER_SESSION,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn labels(s: &str) -> Vec<PatternCondition> {
    s.split_whitespace().map(|l| l.parse().unwrap()).collect()
}

/// Plain Fisher-Yates over table order, written from the algorithm description.
fn reference_plan(seed: u64) -> Vec<PatternCondition> {
    let all = PatternCondition::all();
    let mut v: Vec<PatternCondition> = (0..REPETITIONS * CONDITION_COUNT)
        .map(|i| all[i % CONDITION_COUNT])
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = v.len() - 1;
    while i > 0 {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
        i -= 1;
    }
    v
}

#[test]
fn plan_golden_orders() {
    assert_eq!(
        generate_plan("p", 0).trials,
        labels(
            "FR-c WS-h WC-h FR-c WS-h WS-c WC-h MW-c FR-c WC-c FR-h MW-c WS-c MW-c GT-c WS-c FR-h WC-h WS-c GT-h \
             FR-h GT-h GT-h WS-c FR-h WS-h WC-h MW-h WC-c MW-h MW-h FR-c GT-c GT-c MW-c MW-c WC-h WC-c GT-c WC-c \
             GT-c FR-c WS-h MW-h GT-h FR-h GT-h WC-c MW-h WS-h"
        )
    );
    assert_eq!(
        generate_plan("p", 42).trials,
        labels(
            "WS-h GT-h WS-c FR-c GT-c FR-c WS-h MW-h WC-h MW-c WC-h GT-h WC-c MW-h WS-h GT-h MW-c WS-c FR-h GT-c \
             WS-h GT-c FR-h FR-c FR-h FR-h MW-h WC-h MW-h GT-c WS-c WS-h MW-c GT-h FR-c FR-c WS-c WC-h WC-c WC-c \
             MW-c WC-h GT-c WC-c MW-c WC-c MW-h WS-c FR-h GT-h"
        )
    );
    for seed in [0, 1, 42, 20_250_102, u64::MAX] {
        assert_eq!(generate_plan("p", seed).trials, reference_plan(seed));
    }
    // the participant label does not enter the shuffle
    assert_eq!(generate_plan("p01", 9).trials, generate_plan("p02", 9).trials);
}

#[test]
fn ten_thousand_plans_are_balanced() {
    let mut position_counts = vec![[0u64; CONDITION_COUNT]; TRIALS_PER_SESSION];
    for seed in 0..10_000u64 {
        let plan = generate_plan("p", seed);
        assert_eq!(plan.len(), TRIALS_PER_SESSION);
        assert_eq!(plan.condition_counts(), [REPETITIONS; CONDITION_COUNT], "seed {seed}");
        for (pos, c) in plan.trials.iter().enumerate() {
            position_counts[pos][c.index()] += 1;
        }
    }
    // each position should be uniform over the ten conditions
    let chi = ChiSquared::new(9.0).unwrap();
    for (pos, counts) in position_counts.iter().enumerate() {
        let stat: f64 = counts.iter().map(|&o| (o as f64 - 1000.0).powi(2) / 1000.0).sum();
        let p = 1.0 - chi.cdf(stat);
        assert!(p > 1e-4, "position {pos}: chi2 {stat:.1}, p {p:.2e}, counts {counts:?}");
    }
}

fn fixture_records() -> Vec<TrialRecord> {
    let mut entries: Vec<LogEntry> = Vec::new();
    for p in 1..=9 {
        let path = fixture(&format!("study/p{p:02}.jsonl"));
        // reopening validates sequencing and the plan rebuilt from the seed
        let log = SessionLog::open(&path).unwrap();
        assert!(log.session().is_complete());
        entries.extend(parse_log(&std::fs::read_to_string(&path).unwrap()).unwrap());
    }
    trial_records(&entries)
}

/// Reference confusion proportions, rows = presented, columns = perceived.
const REFERENCE: [[f64; 10]; 10] = [
    [1.00, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.93, 0.07, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.04, 0.82, 0.07, 0.0, 0.0, 0.0, 0.02, 0.0, 0.04],
    [0.0, 0.0, 0.02, 0.80, 0.16, 0.0, 0.0, 0.0, 0.02, 0.0],
    [0.09, 0.0, 0.0, 0.07, 0.80, 0.0, 0.0, 0.02, 0.02, 0.0],
    [0.07, 0.0, 0.0, 0.0, 0.0, 0.93, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.04, 0.0, 0.0, 0.0, 0.02, 0.80, 0.13, 0.0, 0.0],
    [0.0, 0.0, 0.09, 0.02, 0.0, 0.0, 0.0, 0.78, 0.07, 0.04],
    [0.0, 0.0, 0.0, 0.02, 0.0, 0.0, 0.02, 0.07, 0.76, 0.13],
    [0.0, 0.0, 0.0, 0.0, 0.04, 0.0, 0.0, 0.02, 0.09, 0.84],
];

#[test]
fn fixture_log_reproduces_reference_table() {
    let records = fixture_records();
    assert_eq!(records.len(), 9 * TRIALS_PER_SESSION);
    let m = confusion_matrix(&records).unwrap();
    for (i, row) in REFERENCE.iter().enumerate() {
        for (j, &want) in row.iter().enumerate() {
            let got = m.proportions[i][j];
            assert!((got - want).abs() <= 0.005 + 1e-12, "cell {i},{j}: {got:.4} vs {want}");
        }
    }
    let s = summarize(&m);
    assert!((s.mean_diagonal - 381.0 / 450.0).abs() < 1e-12);
    assert_eq!(s.best.label.to_string(), "WC-h");
    assert_eq!(s.best.rate, 1.0);
    assert_eq!(s.worst.label.to_string(), "FR-c");
    assert!((s.worst.rate - 34.0 / 45.0).abs() < 1e-12);
}

#[test]
fn fixture_statistics() {
    let table = AccuracyTable::from_records(&fixture_records()).unwrap();
    assert_eq!(table.participants.len(), 9);
    let data = table.to_repeated_measures().unwrap();
    let f = rm_anova(&data, AnovaMode::Factorial).unwrap();
    let temp = f.effect("temperature").unwrap();
    assert_eq!((temp.df_effect, temp.df_error), (1, 8));
    assert!((temp.f - 2.59).abs() < 0.005);
    assert!((temp.p - 0.146).abs() < 0.002);
    assert!((temp.partial_eta_sq - 0.244444).abs() < 0.001);
    let s = rm_anova(&data, AnovaMode::SingleFactor).unwrap();
    let c = s.effect("condition").unwrap();
    assert_eq!((c.df_effect, c.df_error), (9, 72));
    assert!(c.p > 0.05);
    assert!((f.ss_total - f.component_sum()).abs() < 1e-9);

    let pairs = paired_t_tests(&table).unwrap();
    assert_eq!(pairs.len(), 45);
    for p in &pairs {
        if let Some(pb) = p.p_bonferroni {
            assert_eq!(pb, 1.0, "{} vs {}", p.first, p.second);
        }
    }
}

#[test]
fn confusion_requires_every_condition() {
    let plan = generate_plan("p", 3);
    let records: Vec<TrialRecord> = plan.trials[..5]
        .iter()
        .enumerate()
        .map(|(i, &c)| TrialRecord {
            session_id: "s".into(),
            participant_id: "p".into(),
            trial_index: i,
            presented: c,
            perceived: c,
            timestamp_ms: 0,
        })
        .collect();
    assert!(matches!(confusion_matrix(&records), Err(StudyError::IncompleteData(_))));
}

#[test]
fn strict_condition_decoding() {
    assert!("WC-x".parse::<PatternCondition>().is_err());
    assert!("wc-h".parse::<PatternCondition>().is_err());
    assert!(serde_json::from_str::<PatternCondition>("\"ZZ-c\"").is_err());
    assert_eq!(serde_json::to_string(&PatternCondition::all()[6]).unwrap(), "\"GT-c\"");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Writing a session then reopening it reconstructs the presented sequence exactly.
    #[test]
    fn log_replay_equality(seed in any::<u64>(), answers in prop::collection::vec(0usize..10, 0..=50), torn in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let header = SessionHeader { session_id: "s".into(), participant_id: "p".into(), seed, created_ms: 0 };
        let plan = generate_plan("p", seed);
        let mut written = Vec::new();
        {
            let mut log = SessionLog::create(&path, header).unwrap();
            for (i, a) in answers.iter().enumerate() {
                let r = TrialRecord {
                    session_id: "s".into(),
                    participant_id: "p".into(),
                    trial_index: i,
                    presented: plan.trials[i],
                    perceived: PatternCondition::all()[*a],
                    timestamp_ms: i as u64,
                };
                log.append(r.clone()).unwrap();
                written.push(r);
            }
        }
        if torn {
            use std::io::Write;
            let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
            f.write_all(b"{\"kind\":\"trial\",\"sess").unwrap();
        }
        let log = SessionLog::open(&path).unwrap();
        prop_assert_eq!(log.session().records(), written.as_slice());
        let presented: Vec<_> = written.iter().map(|r| r.presented).collect();
        prop_assert_eq!(presented.as_slice(), &plan.trials[..written.len()]);
        prop_assert_eq!(log.session().next_index(), written.len());
    }

    #[test]
    fn every_plan_is_a_permutation_of_the_design(seed in any::<u64>()) {
        let plan = generate_plan("x", seed);
        prop_assert_eq!(plan.condition_counts(), [REPETITIONS; CONDITION_COUNT]);
    }

    #[test]
    fn confusion_rows_are_stochastic(answers in prop::collection::vec(0usize..10, 50), seed in 0u64..1000) {
        let plan = generate_plan("p", seed);
        let records: Vec<TrialRecord> = plan.trials.iter().zip(&answers).enumerate().map(|(i, (&c, &a))| TrialRecord {
            session_id: "s".into(),
            participant_id: "p".into(),
            trial_index: i,
            presented: c,
            perceived: PatternCondition::all()[a],
            timestamp_ms: 0,
        }).collect();
        let m = confusion_matrix(&records).unwrap();
        for row in &m.proportions {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let s = summarize(&m);
        prop_assert!(s.worst.rate <= s.mean_diagonal + 1e-12 && s.mean_diagonal <= s.best.rate + 1e-12);
    }
}

#[test]
fn random_logs_survive_torn_writes_at_any_offset() {
    let mut rng = SplitMix(77);
    let dir = tempfile::tempdir().unwrap();
    let plan = generate_plan("p", 5);
    let path = dir.path().join("full.jsonl");
    {
        let mut log = SessionLog::create(
            &path,
            SessionHeader {
                session_id: "s".into(),
                participant_id: "p".into(),
                seed: 5,
                created_ms: 0,
            },
        )
        .unwrap();
        for (i, &c) in plan.trials.iter().enumerate().take(20) {
            log.append(TrialRecord {
                session_id: "s".into(),
                participant_id: "p".into(),
                trial_index: i,
                presented: c,
                perceived: c,
                timestamp_ms: 0,
            })
            .unwrap();
        }
    }
    let bytes = std::fs::read(&path).unwrap();
    let header_len = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
    for _ in 0..50 {
        let cut = header_len + (rng.next_u64() as usize % (bytes.len() - header_len));
        let p = dir.path().join("cut.jsonl");
        std::fs::write(&p, &bytes[..cut]).unwrap();
        let complete_lines = bytes[..cut].iter().filter(|&&b| b == b'\n').count();
        let log = SessionLog::open(&p).unwrap();
        assert_eq!(log.session().next_index(), complete_lines - 1, "cut at {cut}");
        assert_eq!(std::fs::metadata(&p).unwrap().len() as usize, {
            let mut end = cut;
            while end > 0 && bytes[end - 1] != b'\n' {
                end -= 1;
            }
            end
        });
    }
}
