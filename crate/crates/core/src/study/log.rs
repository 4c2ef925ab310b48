//! Append-only trial logs, one JSON record per line.
//!
//! A session file starts with a `session` header carrying the plan seed and
//! continues with strictly sequenced `trial` records. Reopening a file
//! rebuilds the plan from the seed and resumes at the next index.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::condition::PatternCondition;
use super::plan::{generate_plan, TrialPlan};
use super::StudyError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub session_id: String,
    pub participant_id: String,
    pub trial_index: usize,
    pub presented: PatternCondition,
    pub perceived: PatternCondition,
    pub timestamp_ms: u64,
}

impl TrialRecord {
    pub fn correct(&self) -> bool {
        self.presented == self.perceived
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: String,
    pub participant_id: String,
    pub seed: u64,
    pub created_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogEntry {
    Session(SessionHeader),
    Trial(TrialRecord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ack {
    Appended,
    Duplicate,
}

/// Parses log text. A torn final line (no trailing newline, not valid JSON) is ignored.
pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, StudyError> {
    let mut out = Vec::new();
    let lines: Vec<&str> = text.split('\n').collect();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(entry) => out.push(entry),
            Err(_) if i == lines.len() - 1 => break,
            Err(e) => {
                return Err(StudyError::Log {
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

pub fn read_log_file(path: impl AsRef<Path>) -> Result<Vec<LogEntry>, StudyError> {
    parse_log(&std::fs::read_to_string(path)?)
}

/// Trial records from a set of entries, headers dropped.
pub fn trial_records(entries: &[LogEntry]) -> Vec<TrialRecord> {
    entries
        .iter()
        .filter_map(|e| match e {
            LogEntry::Trial(t) => Some(t.clone()),
            LogEntry::Session(_) => None,
        })
        .collect()
}

/// Validates and stores one session's trial sequence.
#[derive(Debug, Clone)]
pub struct SessionRecords {
    header: SessionHeader,
    plan: TrialPlan,
    records: Vec<TrialRecord>,
}

impl SessionRecords {
    pub fn new(header: SessionHeader) -> Self {
        let plan = generate_plan(&header.participant_id, header.seed);
        Self {
            header,
            plan,
            records: Vec::new(),
        }
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn plan(&self) -> &TrialPlan {
        &self.plan
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn next_index(&self) -> usize {
        self.records.len()
    }

    /// Checks `record` against the sequence; `Ok(Ack::Duplicate)` for an exact resubmission.
    pub fn check(&self, record: &TrialRecord) -> Result<Ack, StudyError> {
        if record.session_id != self.header.session_id || record.participant_id != self.header.participant_id {
            return Err(StudyError::Integrity(format!(
                "record for session {}/{} offered to session {}/{}",
                record.session_id, record.participant_id, self.header.session_id, self.header.participant_id
            )));
        }
        let expected = self.next_index();
        if record.trial_index < expected {
            return if self.records[record.trial_index] == *record {
                Ok(Ack::Duplicate)
            } else {
                Err(StudyError::Integrity(format!(
                    "trial {} already recorded with a different payload",
                    record.trial_index
                )))
            };
        }
        if record.trial_index != expected {
            return Err(StudyError::Sequence {
                expected,
                got: record.trial_index,
            });
        }
        match self.plan.trials.get(expected) {
            None => Err(StudyError::SessionComplete),
            Some(&planned) if planned != record.presented => Err(StudyError::Integrity(format!(
                "trial {expected} presented {} but the plan says {planned}",
                record.presented
            ))),
            Some(_) => Ok(Ack::Appended),
        }
    }

    pub fn push(&mut self, record: TrialRecord) -> Result<Ack, StudyError> {
        let ack = self.check(&record)?;
        if ack == Ack::Appended {
            self.records.push(record);
        }
        Ok(ack)
    }

    pub fn is_complete(&self) -> bool {
        self.records.len() == self.plan.len()
    }
}

/// A session's durable log file. One writer per file.
#[derive(Debug)]
pub struct SessionLog {
    path: PathBuf,
    file: File,
    session: SessionRecords,
}

impl SessionLog {
    pub fn create(path: impl AsRef<Path>, header: SessionHeader) -> Result<Self, StudyError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().create_new(true).append(true).open(&path)?;
        write_line(&mut file, &LogEntry::Session(header.clone()))?;
        Ok(Self {
            path,
            file,
            session: SessionRecords::new(header),
        })
    }

    /// Reopens an existing log, truncating a torn trailing line left by a crash.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StudyError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).write(true).open(&path)?;
        let mut reader = BufReader::new(&mut file);
        let mut valid_len = 0u64;
        let mut entries = Vec::new();
        let mut line = String::new();
        let mut line_no = 0;
        loop {
            line.clear();
            let n = reader.read_line(&mut line)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            if !line.ends_with('\n') {
                break;
            }
            if !line.trim().is_empty() {
                let entry: LogEntry = serde_json::from_str(&line).map_err(|e| StudyError::Log {
                    line: line_no,
                    message: e.to_string(),
                })?;
                entries.push(entry);
            }
            valid_len += n as u64;
        }
        drop(reader);
        if file.metadata()?.len() != valid_len {
            file.set_len(valid_len)?;
        }
        file.seek(SeekFrom::End(0))?;

        let mut iter = entries.into_iter();
        let header = match iter.next() {
            Some(LogEntry::Session(h)) => h,
            _ => {
                return Err(StudyError::Log {
                    line: 1,
                    message: "log does not start with a session header".into(),
                })
            }
        };
        let mut session = SessionRecords::new(header);
        for entry in iter {
            match entry {
                LogEntry::Trial(t) => {
                    session.push(t)?;
                }
                LogEntry::Session(_) => {
                    return Err(StudyError::Log {
                        line: 0,
                        message: "second session header".into(),
                    })
                }
            }
        }
        Ok(Self { path, file, session })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn session(&self) -> &SessionRecords {
        &self.session
    }

    /// Durably appends `record`; exact duplicates are acknowledged without a second row.
    pub fn append(&mut self, record: TrialRecord) -> Result<Ack, StudyError> {
        let ack = self.session.check(&record)?;
        if ack == Ack::Appended {
            write_line(&mut self.file, &LogEntry::Trial(record.clone()))?;
            self.session.push(record)?;
        }
        Ok(ack)
    }
}

fn write_line(file: &mut File, entry: &LogEntry) -> Result<(), StudyError> {
    let mut line = serde_json::to_string(entry).map_err(|e| StudyError::Log {
        line: 0,
        message: e.to_string(),
    })?;
    line.push('\n');
    file.write_all(line.as_bytes())?;
    file.sync_data()?;
    Ok(())
}
