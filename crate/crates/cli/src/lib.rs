//! Pipeline orchestration behind the `covscreen` binary.
//!
//! Every subcommand is a thin wrapper over a function in [`pipeline`], so
//! tests and the acceptance suite can drive the exact production code paths
//! in-process. All functions are deterministic in `(inputs, config, seed)`.

mod config;
pub mod pipeline;

pub use config::{Overrides, RunConfig};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad config {path}:{line}: {reason}")]
    Config {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Corpus(#[from] covscreen_core::corpus::CorpusError),
    #[error("audio processing failed for recording {id:?}: {source}")]
    Audio {
        id: String,
        #[source]
        source: covscreen_core::audio::AudioError,
    },
    #[error("feature extraction failed for recording {id:?}: {source}")]
    Feature {
        id: String,
        #[source]
        source: covscreen_core::features::FeatureError,
    },
    #[error(transparent)]
    Model(#[from] covscreen_core::models::ModelError),
    #[error(transparent)]
    Eval(#[from] covscreen_core::eval::EvalError),
    #[error(transparent)]
    Fusion(#[from] covscreen_core::fusion::FusionError),
    #[error(transparent)]
    Board(#[from] covscreen_leaderboard::LeaderboardError),
    #[error("missing fold model {path}: run `covscreen train` first")]
    MissingModel { path: PathBuf },
    #[error("manifest has no fold assignment; regenerate with `covscreen synth` or assign folds")]
    MissingFolds,
    #[error("unknown split {value:?} (expected dev, test or all)")]
    UnknownSplit { value: String },
}

impl PipelineError {
    /// Stable machine-readable code printed on failure.
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Io { .. } => "IO",
            PipelineError::Config { .. } => "CONFIG",
            PipelineError::Corpus(_) => "CORPUS",
            PipelineError::Audio { .. } => "AUDIO",
            PipelineError::Feature { .. } => "FEATURES",
            PipelineError::Model(_) => "MODEL",
            PipelineError::Eval(_) => "EVAL",
            PipelineError::Fusion(_) => "FUSION",
            PipelineError::Board(e) => match e.code() {
                covscreen_leaderboard::ErrorCode::Auth => "AUTH",
                covscreen_leaderboard::ErrorCode::Quota => "QUOTA",
                covscreen_leaderboard::ErrorCode::IdMismatch => "ID_MISMATCH",
                covscreen_leaderboard::ErrorCode::Malformed => "MALFORMED",
                covscreen_leaderboard::ErrorCode::DuplicateName => "DUPLICATE_NAME",
                covscreen_leaderboard::ErrorCode::UnknownTrack => "UNKNOWN_TRACK",
                covscreen_leaderboard::ErrorCode::CorruptJournal => "CORRUPT_JOURNAL",
                covscreen_leaderboard::ErrorCode::Internal => "BOARD",
            },
            PipelineError::MissingModel { .. } => "MISSING_MODEL",
            PipelineError::MissingFolds => "MISSING_FOLDS",
            PipelineError::UnknownSplit { .. } => "CONFIG",
        }
    }
}
