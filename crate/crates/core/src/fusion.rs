//! Min-max score calibration and arithmetic mean fusion across systems.
//!
//! Each system's column is first rescaled so its minimum maps to 0 and its
//! maximum to 1, then the fused score per subject is the plain mean of the
//! calibrated columns. A column with no variation is rejected: it carries no
//! ranking information and would only dilute the fusion.

use thiserror::Error;

use crate::eval::ScoreFile;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("degenerate column for system {system}: all scores equal {value}")]
    DegenerateColumn { system: usize, value: f64 },
    #[error("score files disagree on ids: {detail}")]
    IdSetMismatch { detail: String },
    #[error("fusion needs at least one system")]
    Empty,
}

/// Subject-by-system score matrix with aligned ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamScoreMatrix {
    ids: Vec<String>,
    /// One column per system, each `ids.len()` long.
    columns: Vec<Vec<f64>>,
}

impl TeamScoreMatrix {
    /// Aligns score files into a matrix; every file must score exactly the
    /// same id set.
    pub fn from_score_files(files: &[ScoreFile]) -> Result<Self, FusionError> {
        let first = files.first().ok_or(FusionError::Empty)?;
        let ids: Vec<String> = first.ids().map(str::to_string).collect();
        let mut columns = Vec::with_capacity(files.len());
        for (j, file) in files.iter().enumerate() {
            if file.len() != ids.len() || !ids.iter().all(|id| file.get(id).is_some()) {
                let missing: Vec<&String> =
                    ids.iter().filter(|id| file.get(id).is_none()).take(5).collect();
                let extra: Vec<&str> = file
                    .ids()
                    .filter(|id| first.get(id).is_none())
                    .take(5)
                    .collect();
                return Err(FusionError::IdSetMismatch {
                    detail: format!(
                        "system {j} missing {missing:?}, unexpected {extra:?}"
                    ),
                });
            }
            columns.push(ids.iter().map(|id| file.get(id).unwrap()).collect());
        }
        Ok(TeamScoreMatrix { ids, columns })
    }

    pub fn n_subjects(&self) -> usize {
        self.ids.len()
    }

    pub fn n_systems(&self) -> usize {
        self.columns.len()
    }
}

/// Rescales a column to span `[0, 1]`: `(p - min) / (max - min)`.
pub fn calibrate_minmax(column: &[f64]) -> Result<Vec<f64>, FusionError> {
    let min = column.iter().copied().fold(f64::INFINITY, f64::min);
    let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Err(FusionError::DegenerateColumn {
            system: 0,
            value: min,
        });
    }
    Ok(column.iter().map(|&p| (p - min) / (max - min)).collect())
}

/// Calibrates every column and averages them per subject.
pub fn fuse_mean(matrix: &TeamScoreMatrix) -> Result<ScoreFile, FusionError> {
    if matrix.columns.is_empty() {
        return Err(FusionError::Empty);
    }
    let mut calibrated = Vec::with_capacity(matrix.columns.len());
    for (j, col) in matrix.columns.iter().enumerate() {
        let c = calibrate_minmax(col).map_err(|e| match e {
            FusionError::DegenerateColumn { value, .. } => {
                FusionError::DegenerateColumn { system: j, value }
            }
            other => other,
        })?;
        calibrated.push(c);
    }
    let t = calibrated.len() as f64;
    let mut fused = ScoreFile::new();
    for (i, id) in matrix.ids.iter().enumerate() {
        let sum: f64 = calibrated.iter().map(|col| col[i]).sum();
        fused.insert(id.clone(), sum / t);
    }
    Ok(fused)
}
