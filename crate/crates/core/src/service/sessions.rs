//! File-backed study sessions, one log per session, each behind its own lock.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::study::{
    confusion_matrix, summarize, Ack, ConfusionMatrix, PatternCondition, SessionHeader, SessionLog, StudyError,
    Summary, TrialRecord, CONDITION_COUNT, TRIALS_PER_SESSION,
};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown session {0:?}")]
    NotFound(String),
    #[error("session is complete")]
    Complete,
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error(transparent)]
    Study(StudyError),
}

impl From<StudyError> for SessionError {
    fn from(e: StudyError) -> Self {
        match e {
            StudyError::SessionComplete => SessionError::Complete,
            other => SessionError::Study(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub participant_id: String,
    pub seed: u64,
    pub cursor: usize,
    pub total: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentedTrial {
    pub session_id: String,
    pub trial_index: usize,
    pub presented: PatternCondition,
    /// The presented condition must not be shown to the participant.
    pub experimenter_only: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseAck {
    /// `appended` or `duplicate`.
    pub ack: String,
    pub trial_index: usize,
    pub cursor: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResults {
    pub session_id: String,
    pub participant_id: String,
    pub completed: usize,
    pub total: usize,
    pub labels: Vec<PatternCondition>,
    /// Raw presented x perceived counts so far.
    pub counts: Vec<Vec<u32>>,
    /// Present once every condition has been presented at least once.
    pub confusion: Option<ConfusionMatrix>,
    pub summary: Option<Summary>,
}

struct Slot {
    log: SessionLog,
    pending: Option<usize>,
}

impl Slot {
    fn info(&self) -> SessionInfo {
        let s = self.log.session();
        SessionInfo {
            session_id: s.header().session_id.clone(),
            participant_id: s.header().participant_id.clone(),
            seed: s.header().seed,
            cursor: s.next_index(),
            total: s.plan().len(),
            complete: s.is_complete(),
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub struct SessionManager {
    dir: PathBuf,
    sessions: Mutex<HashMap<String, Arc<Mutex<Slot>>>>,
}

impl SessionManager {
    /// Opens `dir` (creating it if needed) and reloads every session log found there.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, SessionError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir).map_err(|e| SessionError::Study(e.into()))?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| SessionError::Study(e.into()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            match SessionLog::open(&path) {
                Ok(log) => {
                    let id = log.session().header().session_id.clone();
                    sessions.insert(id, Arc::new(Mutex::new(Slot { log, pending: None })));
                }
                Err(e) => warn!("skipping session log {}: {e}", path.display()),
            }
        }
        Ok(Self {
            dir,
            sessions: Mutex::new(sessions),
        })
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, SessionError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(id.to_string()))
    }

    pub fn create(&self, participant_id: &str, seed: u64) -> Result<SessionInfo, SessionError> {
        if participant_id.trim().is_empty() {
            return Err(SessionError::Invalid("participant_id is empty".into()));
        }
        let created_ms = now_ms();
        let mut sessions = self.sessions.lock().unwrap();
        let (session_id, path) = loop {
            let id = format!("s{created_ms:x}{:08x}", rand::random::<u32>());
            let path = self.dir.join(format!("{id}.jsonl"));
            if !sessions.contains_key(&id) && !path.exists() {
                break (id, path);
            }
        };
        let header = SessionHeader {
            session_id: session_id.clone(),
            participant_id: participant_id.to_string(),
            seed,
            created_ms,
        };
        let log = SessionLog::create(&path, header)?;
        let slot = Slot { log, pending: None };
        let info = slot.info();
        sessions.insert(session_id, Arc::new(Mutex::new(slot)));
        Ok(info)
    }

    pub fn info(&self, id: &str) -> Result<SessionInfo, SessionError> {
        Ok(self.slot(id)?.lock().unwrap().info())
    }

    /// Presents the trial at the cursor. Repeated calls before a response return the same trial.
    pub fn next(&self, id: &str) -> Result<PresentedTrial, SessionError> {
        let slot = self.slot(id)?;
        let mut slot = slot.lock().unwrap();
        let s = slot.log.session();
        let cursor = s.next_index();
        let presented = *s.plan().trials.get(cursor).ok_or(SessionError::Complete)?;
        slot.pending = Some(cursor);
        Ok(PresentedTrial {
            session_id: id.to_string(),
            trial_index: cursor,
            presented,
            experimenter_only: true,
        })
    }

    pub fn respond(
        &self,
        id: &str,
        trial_index: usize,
        perceived: PatternCondition,
    ) -> Result<ResponseAck, SessionError> {
        let slot = self.slot(id)?;
        let mut slot = slot.lock().unwrap();
        let s = slot.log.session();
        let header = s.header().clone();
        let ack = match slot.pending {
            Some(pending) if pending == trial_index => {
                let record = TrialRecord {
                    session_id: header.session_id,
                    participant_id: header.participant_id,
                    trial_index,
                    presented: s.plan().trials[trial_index],
                    perceived,
                    timestamp_ms: now_ms(),
                };
                let ack = slot.log.append(record)?;
                slot.pending = None;
                ack
            }
            Some(pending) => {
                return Err(SessionError::Protocol(format!(
                    "trial {pending} is awaiting a response, got one for trial {trial_index}"
                )))
            }
            None => match s.records().get(trial_index) {
                // a resubmitted answer for an already recorded trial
                Some(r) if r.perceived == perceived => Ack::Duplicate,
                _ => {
                    return Err(SessionError::Protocol(format!(
                        "no trial is awaiting a response (got trial {trial_index})"
                    )))
                }
            },
        };
        let info = slot.info();
        Ok(ResponseAck {
            ack: match ack {
                Ack::Appended => "appended".into(),
                Ack::Duplicate => "duplicate".into(),
            },
            trial_index,
            cursor: info.cursor,
            complete: info.complete,
        })
    }

    pub fn records(&self, id: &str) -> Result<Vec<TrialRecord>, SessionError> {
        Ok(self.slot(id)?.lock().unwrap().log.session().records().to_vec())
    }

    pub fn results(&self, id: &str) -> Result<SessionResults, SessionError> {
        let (info, records) = {
            let slot = self.slot(id)?;
            let slot = slot.lock().unwrap();
            (slot.info(), slot.log.session().records().to_vec())
        };
        let mut counts = vec![vec![0u32; CONDITION_COUNT]; CONDITION_COUNT];
        for r in &records {
            counts[r.presented.index()][r.perceived.index()] += 1;
        }
        let confusion = confusion_matrix(&records).ok();
        let summary = confusion.as_ref().map(summarize);
        Ok(SessionResults {
            session_id: info.session_id,
            participant_id: info.participant_id,
            completed: info.cursor,
            total: TRIALS_PER_SESSION,
            labels: PatternCondition::all().to_vec(),
            counts,
            confusion,
            summary,
        })
    }
}
