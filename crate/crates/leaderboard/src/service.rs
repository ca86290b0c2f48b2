//! Service state machine: registration, ticketed submission, rankings.
//!
//! All mutation goes through journal events: the live path builds an event,
//! applies it to in-memory state, appends it to the journal and flushes
//! before answering. Recovery replays the same `apply` over the journal, so
//! a restarted service is observably identical to the original.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;
use std::time::{SystemTime, UNIX_EPOCH};

use covscreen_core::corpus::{Label, Manifest, Split};
use covscreen_core::eval::{metrics_report, MetricsReport, ScoreFile};
use covscreen_core::rng::Rng;
use serde::{Deserialize, Serialize};

use super::journal::{encode, replay, Event, Record};
use super::LeaderboardError;

/// Evaluation tickets granted to each team at registration.
pub const MAX_TICKETS: u32 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Val,
    Test,
}

impl Track {
    pub fn as_str(self) -> &'static str {
        match self {
            Track::Val => "val",
            Track::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Result<Self, LeaderboardError> {
        match s {
            "val" => Ok(Track::Val),
            "test" => Ok(Track::Test),
            other => Err(LeaderboardError::UnknownTrack {
                track: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Server-held ground truth for one track. Deliberately not serializable:
/// labels must never travel through any response or journal payload.
#[derive(Debug, Clone)]
pub struct TrackTruth {
    labels: BTreeMap<String, Label>,
}

impl TrackTruth {
    pub fn new(labels: BTreeMap<String, Label>) -> Result<Self, LeaderboardError> {
        let pos = labels.values().filter(|l| l.is_positive()).count();
        if pos == 0 || pos == labels.len() {
            return Err(LeaderboardError::InvalidTruth {
                track: "?",
                reason: format!(
                    "needs both classes, got {pos} positive of {}",
                    labels.len()
                ),
            });
        }
        Ok(TrackTruth { labels })
    }

    /// Val track holds the dev split, test track the test split.
    pub fn from_manifest(manifest: &Manifest, track: Track) -> Result<Self, LeaderboardError> {
        let split = match track {
            Track::Val => Split::Dev,
            Track::Test => Split::Test,
        };
        let labels: BTreeMap<String, Label> = manifest
            .entries
            .iter()
            .filter(|e| e.split == split)
            .map(|e| (e.id.clone(), e.label))
            .collect();
        Self::new(labels).map_err(|e| match e {
            LeaderboardError::InvalidTruth { reason, .. } => LeaderboardError::InvalidTruth {
                track: track.as_str(),
                reason,
            },
            other => other,
        })
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(String::as_str)
    }
}

/// Response to a successful registration. The token is returned exactly
/// once, here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamCreated {
    pub team_id: String,
    pub token: String,
    pub tickets_remaining: u32,
}

/// Response to an accepted submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmissionResponse {
    pub auc: f64,
    pub spec_at_80sens: f64,
    pub sens_at_95spec: f64,
    pub tickets_remaining: u32,
}

/// One leaderboard row. Holds no token and no label data by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: u32,
    pub team_id: String,
    pub best_auc: f64,
    pub best_spec_at_80sens: f64,
}

#[derive(Debug, Clone)]
struct TeamState {
    name: String,
    tickets_remaining: u32,
}

#[derive(Debug, Clone)]
struct StoredSubmission {
    team_id: String,
    track: Track,
    metrics: MetricsReport,
    global_seq: u64,
}

#[derive(Debug, Default)]
struct State {
    teams: BTreeMap<String, TeamState>,
    token_index: BTreeMap<String, String>,
    submissions: Vec<StoredSubmission>,
    next_seq: u64,
    per_team_seq: BTreeMap<String, u64>,
}

impl State {
    fn apply(&mut self, record: &Record) {
        self.next_seq = record.seq;
        match &record.event {
            Event::TeamRegistered {
                team_id,
                name,
                token,
                tickets,
            } => {
                self.teams.insert(
                    team_id.clone(),
                    TeamState {
                        name: name.clone(),
                        tickets_remaining: *tickets,
                    },
                );
                self.token_index.insert(token.clone(), team_id.clone());
            }
            Event::SubmissionAccepted {
                team_id,
                track,
                sequence_no,
                metrics,
                tickets_remaining,
                ..
            } => {
                if let Some(team) = self.teams.get_mut(team_id) {
                    team.tickets_remaining = *tickets_remaining;
                }
                self.per_team_seq.insert(team_id.clone(), *sequence_no);
                self.submissions.push(StoredSubmission {
                    team_id: team_id.clone(),
                    track: *track,
                    metrics: *metrics,
                    global_seq: record.seq,
                });
            }
        }
    }
}

struct Inner {
    state: State,
    journal: File,
    rng: Rng,
}

/// The scoring service. Cheap to share behind an `Arc`; all write paths
/// serialize on one lock, reads take snapshots concurrently.
pub struct Leaderboard {
    inner: RwLock<Inner>,
    truth_val: TrackTruth,
    truth_test: TrackTruth,
    journal_path: PathBuf,
}

impl Leaderboard {
    /// Opens the service over `journal_path`, replaying any existing
    /// records. A torn or out-of-order record fails the open; the error
    /// reports how many records were recoverable.
    pub fn open(
        truth_val: TrackTruth,
        truth_test: TrackTruth,
        journal_path: impl AsRef<Path>,
        token_seed: u64,
    ) -> Result<Self, LeaderboardError> {
        let journal_path = journal_path.as_ref().to_path_buf();
        let io_err = |source| LeaderboardError::Io {
            path: journal_path.clone(),
            source,
        };
        let (records, corruption) = replay(&journal_path).map_err(io_err)?;
        if let Some(c) = corruption {
            return Err(LeaderboardError::CorruptJournal {
                line: c.line,
                reason: c.reason,
                applied: records.len() as u64,
            });
        }
        let mut state = State::default();
        for record in &records {
            state.apply(record);
        }
        let journal = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&journal_path)
            .map_err(io_err)?;
        // Uncorrelate token streams across restarts by folding in the
        // number of replayed records.
        let rng = Rng::new(token_seed).fork(records.len() as u64);
        Ok(Leaderboard {
            inner: RwLock::new(Inner {
                state,
                journal,
                rng,
            }),
            truth_val,
            truth_test,
            journal_path,
        })
    }

    fn truth(&self, track: Track) -> &TrackTruth {
        match track {
            Track::Val => &self.truth_val,
            Track::Test => &self.truth_test,
        }
    }

    fn commit(&self, inner: &mut Inner, event: Event) -> Result<Record, LeaderboardError> {
        let record = Record {
            seq: inner.state.next_seq + 1,
            event,
        };
        let line = encode(&record);
        inner
            .journal
            .write_all(line.as_bytes())
            .and_then(|()| inner.journal.flush())
            .map_err(|source| LeaderboardError::Io {
                path: self.journal_path.clone(),
                source,
            })?;
        inner.state.apply(&record);
        Ok(record)
    }

    /// Registers a team under a unique name, granting [`MAX_TICKETS`]
    /// tickets and a fresh secret token.
    pub fn register_team(&self, name: &str) -> Result<TeamCreated, LeaderboardError> {
        let mut inner = self.inner.write().expect("leaderboard lock poisoned");
        if inner.state.teams.values().any(|t| t.name == name) {
            return Err(LeaderboardError::DuplicateName {
                name: name.to_string(),
            });
        }
        let team_id = format!("team-{:04}", inner.state.teams.len() + 1);
        let token = format!("{:016x}{:016x}", inner.rng.next_u64(), inner.rng.next_u64());
        self.commit(
            &mut inner,
            Event::TeamRegistered {
                team_id: team_id.clone(),
                name: name.to_string(),
                token: token.clone(),
                tickets: MAX_TICKETS,
            },
        )?;
        Ok(TeamCreated {
            team_id,
            token,
            tickets_remaining: MAX_TICKETS,
        })
    }

    /// Evaluates one submission. The ticket is charged only after every
    /// validation step passes and the record is durably journaled.
    pub fn submit(
        &self,
        token: &str,
        track: Track,
        scorefile_text: &str,
    ) -> Result<SubmissionResponse, LeaderboardError> {
        let mut inner = self.inner.write().expect("leaderboard lock poisoned");
        let team_id = inner
            .state
            .token_index
            .get(token)
            .cloned()
            .ok_or(LeaderboardError::Auth)?;
        let tickets = inner.state.teams[&team_id].tickets_remaining;
        if tickets == 0 {
            return Err(LeaderboardError::Quota);
        }

        let scores = ScoreFile::from_text(scorefile_text, Path::new("submission"))
            .map_err(|e| LeaderboardError::Malformed {
                reason: e.to_string(),
            })?;

        let truth = self.truth(track);
        let missing: Vec<String> = truth
            .ids()
            .filter(|id| scores.get(id).is_none())
            .take(10)
            .map(str::to_string)
            .collect();
        let extra: Vec<String> = scores
            .ids()
            .filter(|id| !truth.labels.contains_key(*id))
            .take(10)
            .map(str::to_string)
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(LeaderboardError::IdMismatch { missing, extra });
        }

        let metrics = metrics_report(&scores, &truth.labels).map_err(|e| {
            LeaderboardError::Malformed {
                reason: format!("evaluation failed: {e}"),
            }
        })?;

        let tickets_remaining = tickets - 1;
        let sequence_no = inner.state.per_team_seq.get(&team_id).copied().unwrap_or(0) + 1;
        let received_at_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        self.commit(
            &mut inner,
            Event::SubmissionAccepted {
                team_id,
                track,
                sequence_no,
                received_at_ms,
                metrics,
                tickets_remaining,
            },
        )?;
        Ok(SubmissionResponse {
            auc: metrics.auc,
            spec_at_80sens: metrics.spec_at_80sens,
            sens_at_95spec: metrics.sens_at_95spec,
            tickets_remaining,
        })
    }

    /// Teams with at least one accepted submission on the track, ordered by
    /// best AUC descending; ties go to the team that reached the AUC first.
    pub fn rankings(&self, track: Track) -> Vec<RankRow> {
        let inner = self.inner.read().expect("leaderboard lock poisoned");
        // team_id → (best auc, spec at that submission, journal seq).
        let mut best: BTreeMap<&str, (f64, f64, u64)> = BTreeMap::new();
        for s in inner.state.submissions.iter().filter(|s| s.track == track) {
            let entry = best.entry(&s.team_id);
            match entry {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert((s.metrics.auc, s.metrics.spec_at_80sens, s.global_seq));
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    if s.metrics.auc > o.get().0 {
                        o.insert((s.metrics.auc, s.metrics.spec_at_80sens, s.global_seq));
                    }
                }
            }
        }
        let mut rows: Vec<(String, f64, f64, u64)> = best
            .into_iter()
            .map(|(id, (auc, spec, seq))| (id.to_string(), auc, spec, seq))
            .collect();
        rows.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("AUC is finite")
                .then(a.3.cmp(&b.3))
        });
        rows.into_iter()
            .enumerate()
            .map(|(i, (team_id, best_auc, best_spec, _))| RankRow {
                rank: i as u32 + 1,
                team_id,
                best_auc,
                best_spec_at_80sens: best_spec,
            })
            .collect()
    }

    /// Remaining tickets for a team id, if it exists.
    pub fn tickets_remaining(&self, team_id: &str) -> Option<u32> {
        let inner = self.inner.read().expect("leaderboard lock poisoned");
        inner.state.teams.get(team_id).map(|t| t.tickets_remaining)
    }

    /// Accepted submissions per team id, across both tracks.
    pub fn accepted_count(&self, team_id: &str) -> usize {
        let inner = self.inner.read().expect("leaderboard lock poisoned");
        inner
            .state
            .submissions
            .iter()
            .filter(|s| s.team_id == team_id)
            .count()
    }
}
