//! Replay logs: one checksummed JSON record per line. A log carries its own
//! resolved config (and any learned tables), so a file on its own is enough
//! to inspect or re-simulate the game.

use super::config::GameConfig;
use crate::dynamics::Action;
use crate::state::{AgentState, GameEvent, Scores};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const LOG_SCHEMA: u32 = 1;

/// FNV-1a, 64 bit. Guards each record line against truncation and bit rot.
pub fn checksum(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema: u32,
    pub artifact: String,
    pub config: GameConfig,
    /// Serialized table text per side ("blue"/"red") when that side plays
    /// the options policy; keeps the log replayable after the file moves.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub qtables: BTreeMap<String, String>,
}

/// State before the step plus what each agent decided; agents in id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub state: AgentState,
    /// Active mode path or option name.
    pub mode: String,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub time: f64,
    pub agents: Vec<AgentRecord>,
}

/// Emitted right after the step that produced the event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub step: u64,
    pub event: GameEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndRecord {
    pub step: u64,
    pub time: f64,
    pub scores: Scores,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Header(Box<LogHeader>),
    Step(StepRecord),
    Event(EventRecord),
    End(EndRecord),
}

#[derive(Debug, Error)]
pub enum LogReadError {
    #[error("cannot read log: {0}")]
    Io(#[from] std::io::Error),
    #[error("log corrupt at line {line}: {msg}")]
    Corrupt { line: usize, msg: String },
    #[error("malformed log: {0}")]
    Structure(String),
}

/// A full game in file order: header, interleaved steps and events, end.
#[derive(Debug, Clone, PartialEq)]
pub struct GameLog {
    pub records: Vec<Record>,
}

impl GameLog {
    pub fn new(records: Vec<Record>) -> Self {
        GameLog { records }
    }

    pub fn header(&self) -> &LogHeader {
        match self.records.first() {
            Some(Record::Header(h)) => h,
            _ => panic!("log invariant broken: no header"),
        }
    }

    pub fn steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Step(s) => Some(s),
            _ => None,
        })
    }

    pub fn events(&self) -> impl Iterator<Item = &EventRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Event(e) => Some(e),
            _ => None,
        })
    }

    pub fn end(&self) -> &EndRecord {
        match self.records.last() {
            Some(Record::End(e)) => e,
            _ => panic!("log invariant broken: no end record"),
        }
    }

    pub fn final_scores(&self) -> Scores {
        self.end().scores
    }

    /// Serialize to the on-disk form: `{fnv1a64:016x} {json}` per record.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.records {
            let json = serde_json::to_string(r).expect("log records always serialize");
            let sum = checksum(json.as_bytes());
            writeln!(out, "{sum:016x} {json}").expect("vec write");
        }
        out
    }

    pub fn write_to_path<P: AsRef<Path>>(&self, path: P) -> std::io::Result<()> {
        std::fs::write(path, self.to_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LogReadError> {
        let text = std::str::from_utf8(bytes).map_err(|e| LogReadError::Corrupt {
            line: 0,
            msg: format!("not utf-8: {e}"),
        })?;
        let mut records = Vec::new();
        let mut lines = 0usize;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            lines = lineno;
            if line.is_empty() {
                return Err(LogReadError::Corrupt {
                    line: lineno,
                    msg: "empty record line".into(),
                });
            }
            let (sum_hex, json) =
                line.split_once(' ')
                    .ok_or_else(|| LogReadError::Corrupt {
                        line: lineno,
                        msg: "missing checksum field".into(),
                    })?;
            let expect = u64::from_str_radix(sum_hex, 16).map_err(|_| LogReadError::Corrupt {
                line: lineno,
                msg: format!("bad checksum field '{sum_hex}'"),
            })?;
            let got = checksum(json.as_bytes());
            if got != expect {
                return Err(LogReadError::Corrupt {
                    line: lineno,
                    msg: format!("checksum mismatch: stored {expect:016x}, computed {got:016x}"),
                });
            }
            let record: Record =
                serde_json::from_str(json).map_err(|e| LogReadError::Corrupt {
                    line: lineno,
                    msg: format!("unreadable record: {e}"),
                })?;
            records.push(record);
        }
        // truncation after a clean newline still shows: the end record is gone
        match records.first() {
            Some(Record::Header(h)) if h.schema == LOG_SCHEMA => {}
            Some(Record::Header(h)) => {
                return Err(LogReadError::Structure(format!(
                    "unsupported log schema {} (expected {LOG_SCHEMA})",
                    h.schema
                )))
            }
            _ => return Err(LogReadError::Structure("first record is not a header".into())),
        }
        if !matches!(records.last(), Some(Record::End(_))) {
            return Err(LogReadError::Corrupt {
                line: lines,
                msg: "log ends without an end record (truncated?)".into(),
            });
        }
        if records
            .iter()
            .skip(1)
            .any(|r| matches!(r, Record::Header(_)))
        {
            return Err(LogReadError::Structure("duplicate header record".into()));
        }
        Ok(GameLog::new(records))
    }

    pub fn read_from_path<P: AsRef<Path>>(path: P) -> Result<Self, LogReadError> {
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes)
    }
}
