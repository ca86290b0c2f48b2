//! Recording manifests, fold assignment, metadata slicing, and the
//! deterministic synthetic corpus standing in for non-redistributable
//! real recordings.

mod manifest;
mod synth;

pub use manifest::{
    assign_folds, filter_subgroup, load_manifest, save_manifest, Gender, Label, Manifest,
    RecordingMeta, Split, DEFAULT_K_FOLDS, MANIFEST_HEADER,
};
pub use synth::{generate_synthetic_corpus, SynthSpec};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest parse error at {path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("duplicate recording id {id:?} at {path}:{line}")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("unknown label {value:?} at {path}:{line} (expected covid or non_covid)")]
    UnknownLabel {
        path: PathBuf,
        line: usize,
        value: String,
    },
    #[error("cannot assign {k} folds: only {count} dev entries labeled {label}")]
    InsufficientClass { label: Label, count: usize, k: u32 },
    #[error("fold {fold} has no dev entry labeled {label}")]
    EmptyFold { fold: u32, label: Label },
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Audio(#[from] crate::audio::AudioError),
}
