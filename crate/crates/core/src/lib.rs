//! Acoustic screening benchmark pipeline.
//!
//! This crate contains everything needed to run a cough-sound screening
//! experiment end to end on a synthetic corpus:
//!
//! 1. [`corpus`] — manifests, stratified fold assignment, metadata slicing,
//!    and a deterministic synthetic two-class audio corpus.
//! 2. [`audio`] — PCM WAV ingestion, resampling to 44.1 kHz, amplitude
//!    normalization, edge trimming and sound-activity filtering.
//! 3. [`features`] — 39-dimensional MFCC+Δ+ΔΔ frame features.
//! 4. [`models`] — logistic regression, a small MLP and a random forest
//!    trained on frame labels, with recording-level and fold-ensemble
//!    inference.
//! 5. [`eval`] — the threshold-sweep ROC protocol, trapezoidal AUC and
//!    operating-point metrics, plus subgroup slicing.
//! 6. [`fusion`] — min-max score calibration and arithmetic mean fusion
//!    across systems.
//!
//! All signal and model math is generic over the scalar type through the
//! [`scalar::Real`] trait (`f32` or `f64`); concrete `f64` is the default
//! everywhere and `*32` aliases are exported below for single-precision use.
//! Every operation that consumes a seed is fully deterministic: the same
//! inputs and seed produce bit-identical outputs, including the bytes of
//! generated WAV files, trained models and score files.

pub mod audio;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod models;
pub mod rng;
pub mod scalar;

pub use scalar::Real;

/// Single-precision waveform.
pub type Waveform32 = audio::Waveform<f32>;
/// Single-precision feature matrix.
pub type FeatureMatrix32 = features::FeatureMatrix<f32>;
/// Single-precision logistic regression model.
pub type LrModel32 = models::LrModel<f32>;
/// Single-precision multilayer perceptron model.
pub type MlpModel32 = models::MlpModel<f32>;
/// Single-precision random forest model.
pub type RfModel32 = models::RfModel<f32>;
