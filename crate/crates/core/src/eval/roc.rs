//! Threshold-sweep ROC, trapezoidal AUC and operating-point statistics.
//!
//! The decision rule is `predict positive iff score >= threshold`, swept
//! over the fixed grid `0.0000, 0.0001, ..., 1.0000`. Ties therefore count
//! as positive predictions; this convention is frozen so leaderboard results
//! are reproducible bit for bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;

use super::{EvalError, ScoreFile};

/// Sweep step between decision thresholds.
pub const ROC_STEP: f64 = 1e-4;
/// Number of sweep points (thresholds `0..=10000` times [`ROC_STEP`]).
pub const ROC_POINTS: usize = 10_001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    /// True positive rate (sensitivity).
    pub tpr: f64,
    /// True negative rate.
    pub specificity: f64,
}

/// Operating points for every threshold on the sweep grid, in threshold
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// Headline metrics of one score file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub auc: f64,
    pub spec_at_80sens: f64,
    pub sens_at_95spec: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// Sweeps the threshold grid over the scored recordings.
///
/// Every scored id must carry a label and both classes must be present;
/// labeled recordings without scores are ignored.
pub fn roc_curve(
    scores: &ScoreFile,
    labels: &BTreeMap<String, Label>,
) -> Result<RocCurve, EvalError> {
    let mut pos: Vec<f64> = Vec::new();
    let mut neg: Vec<f64> = Vec::new();
    for (id, &score) in scores.iter() {
        match labels.get(id) {
            Some(label) if label.is_positive() => pos.push(score),
            Some(_) => neg.push(score),
            None => return Err(EvalError::MissingLabel { id: id.clone() }),
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(EvalError::SingleClass {
            pos: pos.len(),
            neg: neg.len(),
        });
    }
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    neg.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    let points = (0..ROC_POINTS)
        .map(|i| {
            let threshold = i as f64 * ROC_STEP;
            let tp = pos.len() - pos.partition_point(|&s| s < threshold);
            let fp = neg.len() - neg.partition_point(|&s| s < threshold);
            RocPoint {
                threshold,
                tpr: tp as f64 / np,
                specificity: (neg.len() - fp) as f64 / nn,
            }
        })
        .collect();
    Ok(RocCurve {
        points,
        n_pos: pos.len(),
        n_neg: neg.len(),
    })
}

/// Trapezoidal area under TPR against FPR, with the curve closed at (0,0)
/// and (1,1).
pub fn auc(curve: &RocCurve) -> f64 {
    // Threshold descending gives FPR ascending.
    let mut area = 0.0;
    let (mut prev_fpr, mut prev_tpr) = (0.0, 0.0);
    for p in curve.points.iter().rev() {
        let fpr = 1.0 - p.specificity;
        area += (fpr - prev_fpr) * (p.tpr + prev_tpr) / 2.0;
        prev_fpr = fpr;
        prev_tpr = p.tpr;
    }
    area += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;
    area
}

/// Best specificity among sweep points reaching the sensitivity floor.
/// Always feasible: the zero threshold predicts everything positive.
pub fn specificity_at_sensitivity(curve: &RocCurve, floor: f64) -> f64 {
    curve
        .points
        .iter()
        .filter(|p| p.tpr >= floor)
        .map(|p| p.specificity)
        .fold(0.0, f64::max)
}

/// Best sensitivity among sweep points reaching the specificity floor, or 0
/// when no sweep point qualifies.
pub fn sensitivity_at_specificity(curve: &RocCurve, floor: f64) -> f64 {
    curve
        .points
        .iter()
        .filter(|p| p.specificity >= floor)
        .map(|p| p.tpr)
        .fold(0.0, f64::max)
}

/// Computes the full [`MetricsReport`] at the standard operating floors.
pub fn metrics_report(
    scores: &ScoreFile,
    labels: &BTreeMap<String, Label>,
) -> Result<MetricsReport, EvalError> {
    let curve = roc_curve(scores, labels)?;
    Ok(MetricsReport {
        auc: auc(&curve),
        spec_at_80sens: specificity_at_sensitivity(&curve, 0.80),
        sens_at_95spec: sensitivity_at_specificity(&curve, 0.95),
        n_pos: curve.n_pos,
        n_neg: curve.n_neg,
    })
}
