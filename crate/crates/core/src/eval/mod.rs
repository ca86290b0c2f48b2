//! The evaluation protocol: threshold-sweep ROC, trapezoidal AUC,
//! operating-point metrics and subgroup slicing.

mod roc;
mod score_file;
mod subgroup;

pub use roc::{
    auc, metrics_report, roc_curve, sensitivity_at_specificity, specificity_at_sensitivity,
    MetricsReport, RocCurve, RocPoint, ROC_POINTS, ROC_STEP,
};
pub use score_file::ScoreFile;
pub use subgroup::{by_age_threshold, by_gender, subgroup_metrics};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad score file {path} at line {line}: {reason}")]
    ParseScore {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("no ground-truth label for scored recording {id:?}")]
    MissingLabel { id: String },
    #[error("cannot sweep a single-class set ({pos} positive, {neg} negative)")]
    SingleClass { pos: usize, neg: usize },
    #[error("subgroup {group:?} holds a single class ({pos} positive, {neg} negative)")]
    SingleClassGroup {
        group: String,
        pos: usize,
        neg: usize,
    },
}
