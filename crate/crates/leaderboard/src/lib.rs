//! Ticketed scoring service for blind evaluation.
//!
//! Teams register once, receive a secret token and 25 evaluation tickets,
//! and submit score files against server-held ground truth on two tracks
//! (`val` and `test`) sharing one ticket pool. Every accepted submission is
//! appended to a line-delimited JSON journal before the response goes out;
//! replaying the journal reconstructs teams, tickets and rankings exactly.
//! Rejected submissions never consume a ticket.

mod http;
mod journal;
mod service;

pub use http::{router, serve, ErrorBody};
pub use journal::{replay, Event, JournalCorruption, Record};
pub use service::{
    Leaderboard, RankRow, SubmissionResponse, TeamCreated, Track, TrackTruth, MAX_TICKETS,
};

use std::path::PathBuf;

use thiserror::Error;

/// Machine-readable error codes exposed over the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    Auth,
    Quota,
    IdMismatch,
    Malformed,
    DuplicateName,
    UnknownTrack,
    CorruptJournal,
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Auth => "AUTH",
            ErrorCode::Quota => "QUOTA",
            ErrorCode::IdMismatch => "ID_MISMATCH",
            ErrorCode::Malformed => "MALFORMED",
            ErrorCode::DuplicateName => "DUPLICATE_NAME",
            ErrorCode::UnknownTrack => "UNKNOWN_TRACK",
            ErrorCode::CorruptJournal => "CORRUPT_JOURNAL",
            ErrorCode::Internal => "INTERNAL",
        }
    }
}

#[derive(Debug, Error)]
pub enum LeaderboardError {
    #[error("unknown or revoked token")]
    Auth,
    #[error("ticket quota exhausted: all {MAX_TICKETS} evaluation tickets used")]
    Quota,
    #[error("submission ids do not match the track: missing {missing:?}, unexpected {extra:?}")]
    IdMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("malformed score file: {reason}")]
    Malformed { reason: String },
    #[error("team name {name:?} is already registered")]
    DuplicateName { name: String },
    #[error("unknown track {track:?} (expected val or test)")]
    UnknownTrack { track: String },
    #[error("corrupt journal at line {line}: {reason} ({applied} records recovered)")]
    CorruptJournal {
        line: usize,
        reason: String,
        applied: u64,
    },
    #[error("journal I/O failed for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid ground truth for track {track}: {reason}")]
    InvalidTruth { track: &'static str, reason: String },
}

impl LeaderboardError {
    pub fn code(&self) -> ErrorCode {
        match self {
            LeaderboardError::Auth => ErrorCode::Auth,
            LeaderboardError::Quota => ErrorCode::Quota,
            LeaderboardError::IdMismatch { .. } => ErrorCode::IdMismatch,
            LeaderboardError::Malformed { .. } => ErrorCode::Malformed,
            LeaderboardError::DuplicateName { .. } => ErrorCode::DuplicateName,
            LeaderboardError::UnknownTrack { .. } => ErrorCode::UnknownTrack,
            LeaderboardError::CorruptJournal { .. } => ErrorCode::CorruptJournal,
            LeaderboardError::Io { .. } | LeaderboardError::InvalidTruth { .. } => {
                ErrorCode::Internal
            }
        }
    }
}
