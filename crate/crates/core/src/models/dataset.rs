//! Frame-level training data.

use crate::features::FeatureMatrix;
use crate::scalar::Real;

use super::ModelError;

/// Flattened frame dataset: every frame inherits its recording's label.
#[derive(Debug, Clone)]
pub struct FrameDataset<R: Real = f64> {
    features: Vec<R>,
    labels: Vec<bool>,
    groups: Vec<u32>,
    group_ids: Vec<String>,
    width: usize,
}

impl<R: Real> FrameDataset<R> {
    pub fn new(width: usize) -> Self {
        FrameDataset {
            features: Vec::new(),
            labels: Vec::new(),
            groups: Vec::new(),
            group_ids: Vec::new(),
            width,
        }
    }

    /// Appends all frames of one recording.
    pub fn push_recording(&mut self, features: &FeatureMatrix<R>, positive: bool) {
        assert_eq!(features.width(), self.width, "feature width mismatch");
        let group = self.group_ids.len() as u32;
        self.group_ids.push(features.recording_id.clone());
        for row in features.rows() {
            self.features.extend_from_slice(row);
            self.labels.push(positive);
            self.groups.push(group);
        }
    }

    /// Appends one raw frame; test helper for toy problems.
    pub fn push_frame(&mut self, row: &[R], positive: bool) {
        assert_eq!(row.len(), self.width);
        self.features.extend_from_slice(row);
        self.labels.push(positive);
        let group = self.group_ids.len() as u32;
        self.group_ids.push(format!("frame{group}"));
        self.groups.push(group);
    }

    pub fn n_frames(&self) -> usize {
        self.labels.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn feature_row(&self, i: usize) -> &[R] {
        &self.features[i * self.width..(i + 1) * self.width]
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    /// Recording id the frame came from.
    pub fn group_of(&self, i: usize) -> &str {
        &self.group_ids[self.groups[i] as usize]
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l).count();
        (pos, self.labels.len() - pos)
    }

    /// Requires both classes; the single-class guard shared by all trainers.
    pub fn check_two_classes(&self) -> Result<(), ModelError> {
        let (pos, neg) = self.class_counts();
        if pos == 0 || neg == 0 {
            return Err(ModelError::SingleClass { pos, neg });
        }
        Ok(())
    }

    /// Inverse-frequency class weights `(w_pos, w_neg)` normalized so a
    /// balanced dataset gets unit weights: `w_c = M / (2 * M_c)`.
    ///
    /// With these weights the weighted full-batch gradient on the original
    /// data equals the unweighted gradient on a dataset where the minority
    /// class is duplicated up to parity.
    pub fn class_weights(&self) -> (R, R) {
        let (pos, neg) = self.class_counts();
        let m = (pos + neg) as f64;
        (
            crate::scalar::real(m / (2.0 * pos as f64)),
            crate::scalar::real(m / (2.0 * neg as f64)),
        )
    }

    pub fn weight_of(&self, i: usize, weights: (R, R)) -> R {
        if self.labels[i] {
            weights.0
        } else {
            weights.1
        }
    }
}
