//! Append-only journal: one JSON record per line, LF-terminated.
//!
//! The journal is the single source of truth for service state. Records
//! carry a strictly increasing sequence number; replay stops at the first
//! unparseable or out-of-order record and reports it, keeping everything
//! before it.

use std::path::Path;

use covscreen_core::eval::MetricsReport;
use serde::{Deserialize, Serialize};

use super::service::Track;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    TeamRegistered {
        team_id: String,
        name: String,
        token: String,
        tickets: u32,
    },
    SubmissionAccepted {
        team_id: String,
        track: Track,
        sequence_no: u64,
        received_at_ms: u64,
        metrics: MetricsReport,
        tickets_remaining: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub seq: u64,
    pub event: Event,
}

/// Where and why replay stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct JournalCorruption {
    pub line: usize,
    pub reason: String,
}

/// Reads every complete record in order. Returns the records plus the
/// corruption point, if any; records before the corruption are still valid.
pub fn replay(path: impl AsRef<Path>) -> std::io::Result<(Vec<Record>, Option<JournalCorruption>)> {
    let text = match std::fs::read_to_string(path.as_ref()) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e),
    };
    let mut records = Vec::new();
    for (idx, line) in text.split('\n').enumerate() {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let record: Record = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                return Ok((
                    records,
                    Some(JournalCorruption {
                        line: lineno,
                        reason: e.to_string(),
                    }),
                ))
            }
        };
        let expected = records.len() as u64 + 1;
        if record.seq != expected {
            return Ok((
                records,
                Some(JournalCorruption {
                    line: lineno,
                    reason: format!("sequence {} where {expected} was expected", record.seq),
                }),
            ));
        }
        records.push(record);
    }
    Ok((records, None))
}

pub fn encode(record: &Record) -> String {
    let mut line = serde_json::to_string(record).expect("journal record serialization");
    line.push('\n');
    line
}
