mod common;

use std::net::SocketAddr;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use common::server::{create, get, post, run_trials, scripted_run, write_config};
use common::spawn_router;
use hapticvlm::service::{router, AppConfig, AppContext, ConfigError, StartupError};
use hapticvlm::study::TRIALS_PER_SESSION;
use serde_json::{json, Value};

fn start(dir: &Path, extra: &str) -> SocketAddr {
    let cfg = AppConfig::load(&write_config(dir, extra)).unwrap();
    spawn_router(router(Arc::new(AppContext::load(cfg).unwrap())))
}

#[test]
fn full_session_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start(dir.path(), "");
    let (status, health) = get(addr, "/api/health");
    assert_eq!(status, 200);
    assert_eq!(health["status"], "ready");
    assert_eq!(health["materials"], 6);

    let id = create(addr, "p-http", 42);
    run_trials(addr, &id, usize::MAX);
    let (status, results) = get(addr, &format!("/api/session/{id}/results"));
    assert_eq!(status, 200);
    assert_eq!(results["completed"], 50);
    let counts: u64 = results["counts"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap().iter().map(|c| c.as_u64().unwrap()))
        .sum();
    assert_eq!(counts, 50);
    assert!(results["summary"]["mean_diagonal"].as_f64().is_some());
    let log = std::fs::read_to_string(dir.path().join("logs").join(format!("{id}.jsonl"))).unwrap();
    assert_eq!(log.lines().count(), 1 + TRIALS_PER_SESSION);
}

#[test]
fn protocol_errors() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start(dir.path(), "");
    let (status, body) = get(addr, "/api/session/nope/next");
    assert_eq!((status, body["error"].as_str()), (404, Some("not_found")));

    let id = create(addr, "p-err", 1);
    let resp = |idx: usize, perceived: &str| {
        post(
            addr,
            &format!("/api/session/{id}/response"),
            json!({"trial_index": idx, "perceived": perceived}),
        )
    };
    // responding before anything was presented
    assert_eq!(resp(0, "WC-h").0, 409);
    let (_, t0) = get(addr, &format!("/api/session/{id}/next"));
    let (_, again) = get(addr, &format!("/api/session/{id}/next"));
    assert_eq!(t0, again, "next is idempotent while a trial is pending");
    let (status, body) = resp(0, "ZZ-c");
    assert_eq!(status, 422, "{body}");
    let (status, body) = resp(5, "WC-h");
    assert_eq!((status, body["error"].as_str()), (409, Some("protocol_error")));
    assert_eq!(resp(0, "GT-c").1["ack"], "appended");
    // a retried response is acknowledged without a second record
    assert_eq!(resp(0, "GT-c").1["ack"], "duplicate");
    assert_eq!(resp(0, "WS-c").0, 409);
    let (_, results) = get(addr, &format!("/api/session/{id}/results"));
    assert_eq!(results["completed"], 1);
    assert!(results["confusion"].is_null());
}

#[test]
fn concurrent_sessions_stay_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start(dir.path(), "");
    let handles: Vec<_> = (0..6)
        .map(|i| {
            std::thread::spawn(move || {
                let id = create(addr, &format!("c{i}"), 100 + i);
                run_trials(addr, &id, usize::MAX);
                id
            })
        })
        .collect();
    let ids: Vec<String> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    for (i, id) in ids.iter().enumerate() {
        let (_, r) = get(addr, &format!("/api/session/{id}/results"));
        assert_eq!(r["participant_id"], format!("c{i}"));
        assert_eq!(r["completed"], 50);
        let log = std::fs::read_to_string(dir.path().join("logs").join(format!("{id}.jsonl"))).unwrap();
        for (k, line) in log.lines().skip(1).enumerate() {
            let v: Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["trial_index"], k);
            assert_eq!(v["participant_id"], format!("c{i}"));
        }
    }
    assert_eq!(get(addr, "/api/health").1["sessions"], 6);
}

#[test]
fn device_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start(dir.path(), "");
    let (status, play) = post(addr, "/api/haptic/play", json!({"pattern": "ws", "loop": true}));
    assert_eq!(status, 200, "{play}");
    assert_eq!(
        (play["audio_key"].as_str(), play["looping"].as_bool()),
        (Some("WS"), Some(true))
    );
    assert_eq!(post(addr, "/api/haptic/play", json!({"pattern": "XX"})).0, 404);
    assert_eq!(
        post(addr, "/api/haptic/play", json!({"pattern": "GT", "gain": 2.0})).0,
        400
    );

    // the in-process router runs without the background ticker, so only explicit steps move the plate
    assert_eq!(get(addr, "/api/thermal").1["plate_temp_c"], 25.0);
    let (status, s) = post(addr, "/api/thermal", json!({"mode": "hot", "advance_s": 2.0}));
    assert_eq!(status, 200);
    assert_eq!(s["mode"], "hot");
    assert!((s["plate_temp_c"].as_f64().unwrap() - 34.482).abs() < 1e-3, "{s}");
    assert_eq!(post(addr, "/api/thermal", json!({"advance_s": -1.0})).0, 400);

    let (status, r) = post(
        addr,
        "/api/recognize",
        json!({"image_ref": "frames/workbench_0003.png"}),
    );
    assert_eq!(status, 200, "{r}");
    assert_eq!(
        (r["matched"].as_bool(), r["material"].as_str(), r["audio_key"].as_str()),
        (Some(true), Some("steel"), Some("MW"))
    );
    assert_eq!(
        post(addr, "/api/recognize", json!({"image_ref": "frames/unknown.png"})).0,
        502
    );
    assert_eq!(
        post(
            addr,
            "/api/recognize",
            json!({"image_ref": "x", "mask": {"kind": "centered_rect", "fraction": 0}})
        )
        .0,
        400
    );

    let (status, e) = post(
        addr,
        "/api/temperature/estimate",
        json!({"image_ref": "scenes/beach.jpg"}),
    );
    assert_eq!(status, 200, "{e}");
    assert!((e["celsius"].as_f64().unwrap() - 30.0).abs() < 1e-9);
    assert_eq!(
        (e["parse_rule"].as_str(), e["suggested_mode"].as_str()),
        (Some("fahrenheit_converted"), Some("hot"))
    );
    let (_, e) = post(
        addr,
        "/api/temperature/estimate",
        json!({"image_ref": "scenes/ski_slope.jpg"}),
    );
    assert_eq!(e["suggested_mode"], "cold");
    assert_eq!(
        post(
            addr,
            "/api/temperature/estimate",
            json!({"image_ref": "scenes/none.jpg"})
        )
        .0,
        502
    );
}

#[test]
fn backend_failures_map_to_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let replies = dir.path().join("replies.tsv");
    std::fs::write(&replies, "vague.jpg\tIt feels pleasant.\n").unwrap();
    let addr = start(
        dir.path(),
        &format!("vlm.fixture_file = {}\nencoder.backend = none\n", replies.display()),
    );
    let (status, body) = post(addr, "/api/temperature/estimate", json!({"image_ref": "vague.jpg"}));
    assert_eq!((status, body["error"].as_str()), (422, Some("parse_error")));
    let (status, body) = post(addr, "/api/recognize", json!({"image_ref": "a.png"}));
    assert_eq!((status, body["error"].as_str()), (503, Some("no_backend")));
}

#[test]
fn startup_rejects_bad_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "db.path = missing.txt\n");
    assert!(matches!(AppConfig::load(&path), Err(ConfigError::MissingPath { .. })));
    let path = write_config(dir.path(), "server.colour = blue\n");
    assert!(matches!(AppConfig::load(&path), Err(ConfigError::UnknownKey { .. })));

    let bad_db = dir.path().join("bad.txt");
    std::fs::write(&bad_db, "wood, WS, 1, 2\nmetal, MW, 1\n").unwrap();
    let path = write_config(dir.path(), &format!("db.path = {}\n", bad_db.display()));
    let cfg = AppConfig::load(&path).unwrap();
    assert!(matches!(
        AppContext::load(cfg),
        Err(StartupError::Load { what: "database", .. })
    ));

    // encoder table naming a material the database does not have
    let table = dir.path().join("enc.tsv");
    std::fs::write(&table, "a.png\tunobtainium\n").unwrap();
    let path = write_config(dir.path(), &format!("encoder.fixture_file = {}\n", table.display()));
    assert!(AppContext::load(AppConfig::load(&path).unwrap()).is_err());

    // the binary reports the problem and exits non-zero
    let out = Command::new(env!("CARGO_BIN_EXE_hapticvlm"))
        .args(["study", "serve", "--config"])
        .arg(write_config(dir.path(), "db.path = missing.txt\n"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));
}

#[test]
fn crash_and_restart_matches_uninterrupted_run() {
    let clean = scripted_run(None, false);
    assert_eq!(clean["completed"], 50);
    assert_eq!(scripted_run(Some(23), false), clean);
    assert_eq!(scripted_run(Some(23), true), clean);
}
