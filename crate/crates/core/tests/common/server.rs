//! HTTP helpers shared by the service and acceptance suites.

use std::io::{BufRead, BufReader};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::Duration;

use hapticvlm::study::PatternCondition;
use serde_json::{json, Value};

use super::fixture;

pub fn client() -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(20)))
        .http_status_as_error(false)
        .build()
        .into()
}

pub fn parse_body(mut resp: ureq::http::Response<ureq::Body>) -> (u16, Value) {
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

pub fn get(addr: SocketAddr, path: &str) -> (u16, Value) {
    parse_body(client().get(&format!("http://{addr}{path}")).call().unwrap())
}

pub fn post(addr: SocketAddr, path: &str, body: Value) -> (u16, Value) {
    parse_body(client().post(&format!("http://{addr}{path}")).send_json(&body).unwrap())
}

/// Writes a config pointing at the shipped fixtures with logs under `dir`.
pub fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let f = |n: &str| fixture(n).display().to_string();
    let text = format!(
        "db.path = {}\npatterns.registry = {}\nlog.dir = {}\nvlm.backend = fixture\nvlm.fixture_file = {}\n\
         encoder.backend = fixture\nencoder.fixture_file = {}\nthermal.tick_s = 3600\n{extra}",
        f("materials.txt"),
        f("patterns.reg"),
        dir.join("logs").display(),
        f("vlm_replies.tsv"),
        f("encoder_table.tsv"),
    );
    let path = dir.join("test.conf");
    std::fs::write(&path, text).unwrap();
    path
}

/// Scripted participant: right on even trials, otherwise a fixed confusion.
pub fn answer(index: usize, presented: &str) -> String {
    let labels = PatternCondition::all();
    let p: PatternCondition = presented.parse().unwrap();
    let perceived = if index.is_multiple_of(2) {
        p
    } else {
        labels[(p.index() + index) % 10]
    };
    perceived.to_string()
}

pub fn run_trials(addr: SocketAddr, id: &str, until: usize) {
    loop {
        let (status, trial) = get(addr, &format!("/api/session/{id}/next"));
        if status == 409 {
            assert_eq!(trial["error"], "session_complete");
            return;
        }
        assert_eq!(status, 200, "{trial}");
        let index = trial["trial_index"].as_u64().unwrap() as usize;
        if index >= until {
            return;
        }
        assert_eq!(trial["experimenter_only"], true);
        let perceived = answer(index, trial["presented"].as_str().unwrap());
        let (status, ack) = post(
            addr,
            &format!("/api/session/{id}/response"),
            json!({"trial_index": index, "perceived": perceived}),
        );
        assert_eq!(status, 200, "{ack}");
        assert_eq!(ack["ack"], "appended");
    }
}

pub fn create(addr: SocketAddr, participant: &str, seed: u64) -> String {
    let (status, info) = post(
        addr,
        "/api/session",
        json!({"participant_id": participant, "seed": seed}),
    );
    assert_eq!(status, 200, "{info}");
    assert_eq!(info["total"], 50);
    assert_eq!(info["cursor"], 0);
    info["session_id"].as_str().unwrap().to_string()
}

pub fn comparable(mut results: Value) -> Value {
    results.as_object_mut().unwrap().remove("session_id");
    results
}

pub struct Server {
    child: Child,
    pub addr: SocketAddr,
}

impl Server {
    pub fn spawn(config: &Path) -> Self {
        let mut child = Command::new(env!("CARGO_BIN_EXE_hapticvlm"))
            .args(["study", "serve", "--port", "0", "--config"])
            .arg(config)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .parse()
            .unwrap();
        Self { child, addr }
    }

    pub fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Runs a scripted session, killing the server after `crash_after` trials when given.
pub fn scripted_run(crash_after: Option<usize>, torn_tail: bool) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let server = Server::spawn(&config);
    let id = create(server.addr, "p-crash", 20_250_115);
    if let Some(n) = crash_after {
        run_trials(server.addr, &id, n);
        // trial n is on screen when the process dies
        let (_, pending) = get(server.addr, &format!("/api/session/{id}/next"));
        assert_eq!(pending["trial_index"], n);
        server.kill();
        let log = dir.path().join("logs").join(format!("{id}.jsonl"));
        assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 1 + n);
        if torn_tail {
            use std::io::Write;
            let mut f = std::fs::OpenOptions::new().append(true).open(&log).unwrap();
            f.write_all(b"{\"kind\":\"trial\",\"trial_in").unwrap();
        }
        let server = Server::spawn(&config);
        let (_, resumed) = get(server.addr, &format!("/api/session/{id}/next"));
        assert_eq!(
            resumed["trial_index"], n,
            "replay resumes at the first unanswered trial"
        );
        run_trials(server.addr, &id, usize::MAX);
        let (_, r) = get(server.addr, &format!("/api/session/{id}/results"));
        server.kill();
        comparable(r)
    } else {
        run_trials(server.addr, &id, usize::MAX);
        let (_, r) = get(server.addr, &format!("/api/session/{id}/results"));
        server.kill();
        comparable(r)
    }
}
