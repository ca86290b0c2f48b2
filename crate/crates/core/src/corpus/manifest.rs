//! Manifest CSV handling, stratified fold assignment and subgroup slicing.
//!
//! The on-disk format is a fixed-header CSV, UTF-8 with LF line endings:
//!
//! ```text
//! id,path,label,gender,age,fold,split
//! r00001,audio/r00001.wav,covid,f,34,2,dev
//! ```
//!
//! `label` is `covid` or `non_covid`; `gender` is `m`, `f` or `u`; `age` and
//! `fold` may be empty; `split` is `dev` or `test`.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::rng::Rng;

use super::CorpusError;

pub const MANIFEST_HEADER: &str = "id,path,label,gender,age,fold,split";
pub const DEFAULT_K_FOLDS: u32 = 5;

/// Diagnosis group of a recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Covid,
    NonCovid,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Covid => "covid",
            Label::NonCovid => "non_covid",
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Label::Covid)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "m",
            Gender::Female => "f",
            Gender::Unknown => "u",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub id: String,
    pub audio_path: PathBuf,
    pub label: Label,
    pub gender: Gender,
    /// Years, 15..=80 when present.
    pub age: Option<u32>,
    /// 1..=k_folds once assigned; dev entries only.
    pub fold: Option<u32>,
    pub split: Split,
}

/// Ordered collection of recordings plus the fold count in force.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub entries: Vec<RecordingMeta>,
    pub k_folds: u32,
}

impl Manifest {
    pub fn new(entries: Vec<RecordingMeta>) -> Self {
        let k_folds = entries
            .iter()
            .filter_map(|e| e.fold)
            .max()
            .unwrap_or(DEFAULT_K_FOLDS)
            .max(DEFAULT_K_FOLDS);
        Manifest { entries, k_folds }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dev_entries(&self) -> impl Iterator<Item = &RecordingMeta> {
        self.entries.iter().filter(|e| e.split == Split::Dev)
    }

    pub fn test_entries(&self) -> impl Iterator<Item = &RecordingMeta> {
        self.entries.iter().filter(|e| e.split == Split::Test)
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }

    /// Recording id → label, for evaluation against this manifest.
    pub fn labels_by_id(&self) -> BTreeMap<String, Label> {
        self.entries
            .iter()
            .map(|e| (e.id.clone(), e.label))
            .collect()
    }

    /// Checks that every fold `1..=k_folds` holds at least one dev entry of
    /// each class.
    pub fn validate_folds(&self) -> Result<(), CorpusError> {
        for fold in 1..=self.k_folds {
            for label in [Label::Covid, Label::NonCovid] {
                let present = self
                    .dev_entries()
                    .any(|e| e.fold == Some(fold) && e.label == label);
                if !present {
                    return Err(CorpusError::EmptyFold { fold, label });
                }
            }
        }
        Ok(())
    }
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> CorpusError {
    CorpusError::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Loads and validates a manifest CSV.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == MANIFEST_HEADER => {}
        Some((_, header)) => {
            return Err(parse_err(
                path,
                1,
                format!("bad header {header:?}, expected {MANIFEST_HEADER:?}"),
            ))
        }
        None => return Err(parse_err(path, 1, "empty file")),
    }

    let mut entries = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 7 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 7 fields, found {}", fields.len()),
            ));
        }
        let id = fields[0].to_string();
        if id.is_empty() {
            return Err(parse_err(path, lineno, "empty id"));
        }
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId {
                path: path.to_path_buf(),
                line: lineno,
                id,
            });
        }
        let label = match fields[2] {
            "covid" => Label::Covid,
            "non_covid" => Label::NonCovid,
            other => {
                return Err(CorpusError::UnknownLabel {
                    path: path.to_path_buf(),
                    line: lineno,
                    value: other.to_string(),
                })
            }
        };
        let gender = match fields[3] {
            "m" => Gender::Male,
            "f" => Gender::Female,
            "u" => Gender::Unknown,
            other => return Err(parse_err(path, lineno, format!("unknown gender {other:?}"))),
        };
        let age = match fields[4] {
            "" => None,
            digits => {
                let age: u32 = digits
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad age {digits:?}")))?;
                if !(15..=80).contains(&age) {
                    return Err(parse_err(path, lineno, format!("age {age} outside 15..=80")));
                }
                Some(age)
            }
        };
        let fold = match fields[5] {
            "" => None,
            digits => {
                let fold: u32 = digits
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad fold {digits:?}")))?;
                if fold == 0 {
                    return Err(parse_err(path, lineno, "fold must be 1-based"));
                }
                Some(fold)
            }
        };
        let split = match fields[6] {
            "dev" => Split::Dev,
            "test" => Split::Test,
            other => return Err(parse_err(path, lineno, format!("unknown split {other:?}"))),
        };
        entries.push(RecordingMeta {
            id,
            audio_path: PathBuf::from(fields[1]),
            label,
            gender,
            age,
            fold,
            split,
        });
    }
    Ok(Manifest::new(entries))
}

/// Writes a manifest CSV (UTF-8, LF endings), byte-deterministic.
pub fn save_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let mut out = String::with_capacity(64 * (manifest.len() + 1));
    out.push_str(MANIFEST_HEADER);
    out.push('\n');
    for e in &manifest.entries {
        out.push_str(&e.id);
        out.push(',');
        out.push_str(&e.audio_path.display().to_string());
        out.push(',');
        out.push_str(e.label.as_str());
        out.push(',');
        out.push_str(e.gender.as_str());
        out.push(',');
        if let Some(age) = e.age {
            out.push_str(&age.to_string());
        }
        out.push(',');
        if let Some(fold) = e.fold {
            out.push_str(&fold.to_string());
        }
        out.push(',');
        out.push_str(e.split.as_str());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Stratified fold assignment over dev entries: shuffled round-robin within
/// each class, so per-class fold counts differ by at most one. Deterministic
/// in `seed`; test entries are left untouched.
pub fn assign_folds(manifest: &Manifest, k: u32, seed: u64) -> Result<Manifest, CorpusError> {
    assert!(k >= 1, "fold count must be at least 1");
    let mut rng = Rng::new(seed);
    let mut out = manifest.clone();
    out.k_folds = k;
    for e in out.entries.iter_mut() {
        if e.split == Split::Dev {
            e.fold = None;
        }
    }
    for label in [Label::Covid, Label::NonCovid] {
        let mut idx: Vec<usize> = out
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.split == Split::Dev && e.label == label)
            .map(|(i, _)| i)
            .collect();
        if (idx.len() as u32) < k {
            return Err(CorpusError::InsufficientClass {
                label,
                count: idx.len(),
                k,
            });
        }
        rng.shuffle(&mut idx);
        for (pos, &i) in idx.iter().enumerate() {
            out.entries[i].fold = Some((pos as u32 % k) + 1);
        }
    }
    debug_assert!(out.validate_folds().is_ok());
    Ok(out)
}

/// Entries satisfying the predicate, in their original order.
pub fn filter_subgroup(manifest: &Manifest, predicate: impl Fn(&RecordingMeta) -> bool) -> Manifest {
    Manifest {
        entries: manifest
            .entries
            .iter()
            .filter(|e| predicate(e))
            .cloned()
            .collect(),
        k_folds: manifest.k_folds,
    }
}
