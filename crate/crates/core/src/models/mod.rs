//! Baseline frame-level classifiers and recording-level inference.
//!
//! Three model families share one training contract: class-weighted binary
//! cross entropy (inverse-frequency weights) for the gradient-trained models
//! and Gini-grown trees for the forest, all deterministic in the seed. A
//! recording's score is the mean of its frame probabilities, and the final
//! test-time score is the mean over the fold models.

mod adam;
mod dataset;
mod lr;
mod mlp;
mod rf;

pub use adam::Adam;
pub use dataset::FrameDataset;
pub use lr::{lr_loss_grad, train_lr, LrGrad, LrModel};
pub use mlp::{mlp_loss_grad, train_mlp, MlpGrad, MlpModel, HIDDEN_UNITS};
pub use rf::{gini, train_rf, Node, RfModel, Tree, N_TREES};

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureMatrix;
use crate::scalar::{real_of, Real};

/// Shared training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// L2 strength for logistic regression.
    pub l2_lr: f64,
    /// L2 strength for the MLP.
    pub l2_mlp: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 25,
            learning_rate: 0.001,
            l2_lr: 0.01,
            l2_mlp: 0.001,
            batch_size: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lr,
    Mlp,
    Rf,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Mlp => "mlp",
            ModelKind::Rf => "rf",
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lr" => Ok(ModelKind::Lr),
            "mlp" => Ok(ModelKind::Mlp),
            "rf" => Ok(ModelKind::Rf),
            other => Err(format!("unknown model kind {other:?} (expected lr, mlp or rf)")),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A trained classifier of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model<R: Real = f64> {
    Lr(LrModel<R>),
    Mlp(MlpModel<R>),
    Rf(RfModel<R>),
}

impl<R: Real> Model<R> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Lr(_) => ModelKind::Lr,
            Model::Mlp(_) => ModelKind::Mlp,
            Model::Rf(_) => ModelKind::Rf,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Model::Lr(m) => m.width(),
            Model::Mlp(m) => m.width(),
            Model::Rf(m) => m.width(),
        }
    }

    fn predict_one(&self, x: &[R]) -> R {
        match self {
            Model::Lr(m) => m.predict_proba(x),
            Model::Mlp(m) => m.predict_proba(x),
            Model::Rf(m) => m.predict_proba(x),
        }
    }
}

/// Trains the requested model family.
pub fn train<R: Real>(
    kind: ModelKind,
    ds: &FrameDataset<R>,
    cfg: &TrainConfig,
) -> Result<Model<R>, ModelError> {
    Ok(match kind {
        ModelKind::Lr => Model::Lr(train_lr(ds, cfg)?),
        ModelKind::Mlp => Model::Mlp(train_mlp(ds, cfg)?),
        ModelKind::Rf => Model::Rf(train_rf(ds, cfg)?),
    })
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training data holds a single class ({pos} positive, {neg} negative frames)")]
    SingleClass { pos: usize, neg: usize },
    #[error("feature width mismatch: model expects {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("cannot score a recording with no frames")]
    EmptyFeatures,
    #[error("ensemble needs at least one model")]
    EmptyModelList,
    #[error("ensemble mixes model kinds: {expected} and {got}")]
    MixedKinds { expected: ModelKind, got: ModelKind },
    #[error("model file I/O failed for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad model file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

/// Per-frame positive-class probabilities for one recording.
pub fn predict_frame_scores<R: Real>(
    model: &Model<R>,
    features: &FeatureMatrix<R>,
) -> Result<Vec<R>, ModelError> {
    if features.width() != model.width() {
        return Err(ModelError::WidthMismatch {
            expected: model.width(),
            got: features.width(),
        });
    }
    Ok(features.rows().map(|row| model.predict_one(row)).collect())
}

/// Recording-level probability: the arithmetic mean of the frame scores.
pub fn score_recording<R: Real>(
    model: &Model<R>,
    features: &FeatureMatrix<R>,
) -> Result<R, ModelError> {
    if features.n_frames() == 0 {
        return Err(ModelError::EmptyFeatures);
    }
    let scores = predict_frame_scores(model, features)?;
    let sum = scores.iter().fold(R::zero(), |a, &v| a + v);
    Ok(sum / real_of::<R>(scores.len()))
}

/// Fold-ensemble score: the mean of [`score_recording`] over the models.
pub fn ensemble_score<R: Real>(
    models: &[Model<R>],
    features: &FeatureMatrix<R>,
) -> Result<R, ModelError> {
    let first = models.first().ok_or(ModelError::EmptyModelList)?;
    for m in models {
        if m.kind() != first.kind() {
            return Err(ModelError::MixedKinds {
                expected: first.kind(),
                got: m.kind(),
            });
        }
    }
    let mut sum = R::zero();
    for m in models {
        sum = sum + score_recording(m, features)?;
    }
    Ok(sum / real_of::<R>(models.len()))
}

/// Versioned, self-describing model file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: Real + DeserializeOwned"))]
struct ModelFile<R: Real> {
    format: String,
    version: u32,
    train_config: TrainConfig,
    model: Model<R>,
}

const MODEL_FORMAT: &str = "covscreen-model";
const MODEL_VERSION: u32 = 1;

/// Serializes a model with its config to JSON; round-trips exactly.
pub fn save_model<R: Real + Serialize>(
    path: impl AsRef<Path>,
    model: &Model<R>,
    cfg: &TrainConfig,
) -> Result<(), ModelError> {
    let path = path.as_ref();
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        train_config: *cfg,
        model: model.clone(),
    };
    let json = serde_json::to_string(&file).expect("model serialization cannot fail");
    std::fs::write(path, json).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a model saved by [`save_model`], checking format and version.
pub fn load_model<R: Real + DeserializeOwned>(
    path: impl AsRef<Path>,
) -> Result<(Model<R>, TrainConfig), ModelError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ModelFile<R> =
        serde_json::from_slice(&bytes).map_err(|e| ModelError::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    if file.format != MODEL_FORMAT {
        return Err(ModelError::Format {
            path: path.to_path_buf(),
            reason: format!("unexpected format tag {:?}", file.format),
        });
    }
    if file.version != MODEL_VERSION {
        return Err(ModelError::Format {
            path: path.to_path_buf(),
            reason: format!("unsupported version {}", file.version),
        });
    }
    Ok((file.model, file.train_config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn features_from(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        FeatureMatrix::from_rows("rec", rows)
    }

    #[test]
    fn zero_lr_scores_every_frame_half() {
        let model = Model::Lr(LrModel::zeros(39));
        let feats = features_from(vec![vec![0.3; 39]; 4]);
        let scores = predict_frame_scores(&model, &feats).unwrap();
        assert_eq!(scores, vec![0.5; 4]);
    }

    #[test]
    fn degenerate_single_leaf_forest_is_constant() {
        let model = Model::Rf(RfModel {
            input_dim: 39,
            seed: 0,
            trees: vec![Tree {
                nodes: vec![Node::Leaf { p: 0.3 }],
            }],
        });
        let feats = features_from(vec![vec![1.0; 39]; 3]);
        assert_eq!(predict_frame_scores(&model, &feats).unwrap(), vec![0.3; 3]);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let model = Model::Lr(LrModel::zeros(39));
        let feats = features_from(vec![vec![0.0; 38]]);
        assert!(matches!(
            predict_frame_scores(&model, &feats),
            Err(ModelError::WidthMismatch {
                expected: 39,
                got: 38
            })
        ));
    }

    /// Forest whose single tree splits on feature 0 and emits the given
    /// leaf values; handy for pinning exact scores.
    fn stub_model(p_low: f64, p_high: f64) -> Model {
        Model::Rf(RfModel {
            input_dim: 1,
            seed: 0,
            trees: vec![Tree {
                nodes: vec![
                    Node::Split {
                        feature: 0,
                        threshold: 0.5,
                        left: 1,
                        right: 2,
                    },
                    Node::Leaf { p: p_low },
                    Node::Leaf { p: p_high },
                ],
            }],
        })
    }

    #[test]
    fn recording_score_is_frame_mean() {
        // Frames map to scores 0.2, 0.4, 0.6 through leaf lookups.
        let model = Model::Rf(RfModel {
            input_dim: 1,
            seed: 0,
            trees: vec![Tree {
                nodes: vec![
                    Node::Split {
                        feature: 0,
                        threshold: 1.5,
                        left: 1,
                        right: 4,
                    },
                    Node::Split {
                        feature: 0,
                        threshold: 0.5,
                        left: 2,
                        right: 3,
                    },
                    Node::Leaf { p: 0.2 },
                    Node::Leaf { p: 0.4 },
                    Node::Leaf { p: 0.6 },
                ],
            }],
        });
        let feats = features_from(vec![vec![0.0], vec![1.0], vec![2.0]]);
        let s = score_recording(&model, &feats).unwrap();
        assert!((s - 0.4).abs() < 1e-12);
    }

    #[test]
    fn single_frame_score_is_identity() {
        let model = stub_model(0.9, 0.9);
        let feats = features_from(vec![vec![0.0]]);
        assert_eq!(score_recording(&model, &feats).unwrap(), 0.9);
    }

    #[test]
    fn empty_features_is_an_error() {
        let model = stub_model(0.1, 0.9);
        let feats = features_from(vec![]);
        assert!(matches!(
            score_recording(&model, &feats),
            Err(ModelError::EmptyFeatures)
        ));
    }

    #[test]
    fn ensemble_of_identical_models_equals_single() {
        let model = stub_model(0.25, 0.75);
        let feats = features_from(vec![vec![0.0], vec![1.0]]);
        let single = score_recording(&model, &feats).unwrap();
        let five = vec![model.clone(); 5];
        let ens = ensemble_score(&five, &feats).unwrap();
        assert!((single - ens).abs() < 1e-12);
    }

    #[test]
    fn ensemble_averages_models() {
        let a = stub_model(0.2, 0.2);
        let b = stub_model(0.8, 0.8);
        let feats = features_from(vec![vec![0.0]]);
        let s = ensemble_score(&[a, b], &feats).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_ensemble_is_an_error() {
        let feats = features_from(vec![vec![0.0]]);
        assert!(matches!(
            ensemble_score::<f64>(&[], &feats),
            Err(ModelError::EmptyModelList)
        ));
    }

    #[test]
    fn mixed_kind_ensemble_is_an_error() {
        let feats = features_from(vec![vec![0.0; 39]]);
        let models = vec![Model::Lr(LrModel::zeros(39)), stub_model_39()];
        assert!(matches!(
            ensemble_score(&models, &feats),
            Err(ModelError::MixedKinds { .. })
        ));
    }

    fn stub_model_39() -> Model {
        Model::Rf(RfModel {
            input_dim: 39,
            seed: 0,
            trees: vec![Tree {
                nodes: vec![Node::Leaf { p: 0.5 }],
            }],
        })
    }

    #[test]
    fn model_files_roundtrip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut ds: FrameDataset = FrameDataset::new(6);
        let mut rng = Rng::new(3);
        for i in 0..40 {
            let row: Vec<f64> = (0..6).map(|_| rng.range_f64(-1.0, 1.0)).collect();
            ds.push_frame(&row, i % 4 == 0);
        }
        let cfg = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        for kind in [ModelKind::Lr, ModelKind::Mlp, ModelKind::Rf] {
            let model = train(kind, &ds, &cfg).unwrap();
            let path = dir.path().join(format!("{kind}.json"));
            save_model(&path, &model, &cfg).unwrap();
            let (back, back_cfg) = load_model::<f64>(&path).unwrap();
            assert_eq!(model, back, "{kind} params drifted through the file");
            assert_eq!(cfg, back_cfg);
            // A second save of the loaded model is byte-identical.
            let path2 = dir.path().join(format!("{kind}-2.json"));
            save_model(&path2, &back, &back_cfg).unwrap();
            assert_eq!(
                std::fs::read(&path).unwrap(),
                std::fs::read(&path2).unwrap()
            );
        }
    }

    #[test]
    fn load_rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"format\":\"something-else\"}").unwrap();
        assert!(matches!(
            load_model::<f64>(&path),
            Err(ModelError::Format { .. })
        ));
    }

    proptest! {
        #[test]
        fn recording_score_is_permutation_invariant(
            values in proptest::collection::vec(0.0f64..1.0, 1..40),
            seed in 0u64..1000,
        ) {
            // Leaf lookup keeps each frame's score tied to its row, so
            // shuffling rows must not move the mean beyond float noise.
            let model = stub_model(0.0, 1.0);
            let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
            let mut shuffled = rows.clone();
            Rng::new(seed).shuffle(&mut shuffled);
            let a = score_recording(&model, &features_from(rows)).unwrap();
            let b = score_recording(&model, &features_from(shuffled)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn scores_always_land_in_unit_interval(
            raw in proptest::collection::vec(-5.0f64..5.0, 1..20),
        ) {
            let model = Model::Lr(LrModel {
                weights: vec![1.0; 1],
                bias: 0.25,
            });
            let rows: Vec<Vec<f64>> = raw.iter().map(|&v| vec![v]).collect();
            let s = score_recording(&model, &features_from(rows)).unwrap();
            prop_assert!(s > 0.0 && s < 1.0);
        }
    }
}
