//! The leaderboard submission format: one `<id> <score>` line per recording.

use std::collections::btree_map;
use std::collections::BTreeMap;
use std::path::Path;

use super::EvalError;

/// Recording id → probability in `[0, 1]`, kept sorted by id so writes are
/// byte-deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreFile {
    scores: BTreeMap<String, f64>,
}

impl ScoreFile {
    pub fn new() -> Self {
        ScoreFile::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, score: f64) {
        assert!(
            (0.0..=1.0).contains(&score) && score.is_finite(),
            "score {score} outside [0, 1]"
        );
        self.scores.insert(id.into(), score);
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.scores.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, String, f64> {
        self.scores.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(String::as_str)
    }

    /// Serializes as `<id> <score>` with six decimals, LF line endings.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.scores.len() * 16);
        for (id, score) in &self.scores {
            out.push_str(id);
            out.push(' ');
            out.push_str(&format!("{score:.6}"));
            out.push('\n');
        }
        out
    }

    /// Parses the submission format, validating uniqueness and range.
    ///
    /// `origin` only labels error messages.
    pub fn from_text(text: &str, origin: &Path) -> Result<Self, EvalError> {
        let mut scores = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| EvalError::ParseScore {
                path: origin.to_path_buf(),
                line: lineno,
                reason,
            };
            let (id, score_text) = line
                .split_once(' ')
                .ok_or_else(|| err("expected '<id> <score>'".into()))?;
            if id.is_empty() || score_text.is_empty() || score_text.contains(' ') {
                return Err(err("expected exactly one space separator".into()));
            }
            let score: f64 = score_text
                .parse()
                .map_err(|_| err(format!("bad score {score_text:?}")))?;
            if !score.is_finite() || !(0.0..=1.0).contains(&score) {
                return Err(err(format!("score {score} outside [0, 1]")));
            }
            if scores.insert(id.to_string(), score).is_some() {
                return Err(err(format!("duplicate id {id:?}")));
            }
        }
        Ok(ScoreFile { scores })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), EvalError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text, path)
    }
}

impl FromIterator<(String, f64)> for ScoreFile {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        let mut sf = ScoreFile::new();
        for (id, score) in iter {
            sf.insert(id, score);
        }
        sf
    }
}
