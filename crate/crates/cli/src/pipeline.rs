//! The pipeline stages, exactly as the subcommands compose them:
//! synth → preprocess → featurize → train → score → eval / fuse.

use std::path::{Path, PathBuf};

use serde::Serialize;

use covscreen_core::audio::{preprocess, read_pcm_wav, resample, write_pcm_wav, TARGET_RATE};
use covscreen_core::corpus::{
    assign_folds, generate_synthetic_corpus, save_manifest, Label, Manifest, Split,
};
use covscreen_core::eval::{metrics_report, MetricsReport, ScoreFile};
use covscreen_core::features::{extract_features, FeatureMatrix, MfccConfig};
use covscreen_core::fusion::{fuse_mean, TeamScoreMatrix};
use covscreen_core::models::{
    ensemble_score, load_model, save_model, score_recording, train, FrameDataset, Model,
    ModelKind, TrainConfig,
};
use covscreen_core::rng::Rng;

use super::{PipelineError, RunConfig};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Resolves a manifest-relative audio path.
fn resolve(base: &Path, rel: &Path) -> PathBuf {
    base.join(rel)
}

/// Generates the synthetic corpus and assigns stratified folds when the dev
/// split can support them.
pub fn synth_corpus(cfg: &RunConfig, out_dir: &Path) -> Result<Manifest, PipelineError> {
    let manifest = generate_synthetic_corpus(&cfg.synth, out_dir)?;
    let k = cfg.k_folds;
    let enough = |label: Label| {
        manifest
            .dev_entries()
            .filter(|e| e.label == label)
            .count() as u32
            >= k
    };
    if !manifest.is_empty() && enough(Label::Covid) && enough(Label::NonCovid) {
        let with_folds = assign_folds(&manifest, k, cfg.seed)?;
        save_manifest(&with_folds, out_dir.join("manifest.csv"))?;
        Ok(with_folds)
    } else {
        Ok(manifest)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PreprocessSummary {
    pub kept: usize,
    /// `(recording id, reason)` for curated-out recordings.
    pub dropped: Vec<(String, String)>,
}

/// Reads, resamples and preprocesses every recording, writing the kept ones
/// under `out_dir/audio/` with a rewritten manifest at
/// `out_dir/manifest.csv`. Recordings failing the duration or activity
/// gates are dropped from the output manifest, mirroring corpus curation.
pub fn preprocess_corpus(
    manifest: &Manifest,
    audio_base: &Path,
    out_dir: &Path,
    cfg: &RunConfig,
) -> Result<(Manifest, PreprocessSummary), PipelineError> {
    use covscreen_core::audio::AudioError;

    let audio_dir = out_dir.join("audio");
    std::fs::create_dir_all(&audio_dir).map_err(io_err(&audio_dir))?;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for entry in &manifest.entries {
        let src = resolve(audio_base, &entry.audio_path);
        let raw: covscreen_core::audio::Waveform = read_pcm_wav(&src)
            .map_err(|source| PipelineError::Audio {
                id: entry.id.clone(),
                source,
            })?;
        let at_rate = resample(&raw, TARGET_RATE);
        match preprocess(&at_rate, &cfg.preprocess) {
            Ok(clean) => {
                let rel = PathBuf::from("audio").join(format!("{}.wav", entry.id));
                write_pcm_wav(out_dir.join(&rel), &clean).map_err(|source| {
                    PipelineError::Audio {
                        id: entry.id.clone(),
                        source,
                    }
                })?;
                let mut e = entry.clone();
                e.audio_path = rel;
                kept.push(e);
            }
            Err(e @ (AudioError::TooShort { .. } | AudioError::NoActivity { .. })) => {
                dropped.push((entry.id.clone(), e.to_string()));
            }
            Err(source) => {
                return Err(PipelineError::Audio {
                    id: entry.id.clone(),
                    source,
                })
            }
        }
    }
    let out = Manifest {
        entries: kept,
        k_folds: manifest.k_folds,
    };
    save_manifest(&out, out_dir.join("manifest.csv"))?;
    let summary = PreprocessSummary {
        kept: out.len(),
        dropped,
    };
    Ok((out, summary))
}

#[derive(Debug, Clone, Serialize)]
pub struct FeaturizeSummary {
    pub computed: usize,
    pub cached: usize,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv64(bytes: &[u8], mut hash: u64) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Extracts features for every recording into `features_dir/<id>.csv`.
///
/// A sidecar `<id>.hash` keyed on the audio bytes and the feature config
/// makes re-runs free; the cache never changes results, only skips work.
pub fn featurize_corpus(
    manifest: &Manifest,
    audio_base: &Path,
    features_dir: &Path,
    mfcc: &MfccConfig,
) -> Result<FeaturizeSummary, PipelineError> {
    std::fs::create_dir_all(features_dir).map_err(io_err(features_dir))?;
    let cfg_json = serde_json::to_vec(mfcc).expect("config serializes");
    let mut computed = 0;
    let mut cached = 0;
    for entry in &manifest.entries {
        let src = resolve(audio_base, &entry.audio_path);
        let wav_bytes = std::fs::read(&src).map_err(io_err(&src))?;
        let hash = format!("{:016x}", fnv64(&cfg_json, fnv64(&wav_bytes, FNV_OFFSET)));

        let csv_path = features_dir.join(format!("{}.csv", entry.id));
        let hash_path = features_dir.join(format!("{}.hash", entry.id));
        let fresh = csv_path.exists()
            && std::fs::read_to_string(&hash_path)
                .map(|h| h.trim() == hash)
                .unwrap_or(false);
        if fresh {
            cached += 1;
            continue;
        }

        let wav: covscreen_core::audio::Waveform =
            read_pcm_wav(&src).map_err(|source| PipelineError::Audio {
                id: entry.id.clone(),
                source,
            })?;
        let features = extract_features(&wav, mfcc, entry.id.clone()).map_err(|source| {
            PipelineError::Feature {
                id: entry.id.clone(),
                source,
            }
        })?;
        features.write_csv(&csv_path).map_err(|source| PipelineError::Feature {
            id: entry.id.clone(),
            source,
        })?;
        std::fs::write(&hash_path, format!("{hash}\n")).map_err(io_err(&hash_path))?;
        computed += 1;
    }
    Ok(FeaturizeSummary { computed, cached })
}

fn load_features(features_dir: &Path, id: &str) -> Result<FeatureMatrix, PipelineError> {
    let path = features_dir.join(format!("{id}.csv"));
    FeatureMatrix::read_csv(&path, id).map_err(|source| PipelineError::Feature {
        id: id.to_string(),
        source,
    })
}

/// Per-fold validation report: the output of five-fold training.
#[derive(Debug, Clone, Serialize)]
pub struct FoldReport {
    pub model: ModelKind,
    pub per_fold: Vec<MetricsReport>,
    pub per_fold_auc: Vec<f64>,
    pub mean_auc: f64,
    /// Sample standard error over the folds.
    pub std_err: f64,
}

/// Trains one model per fold on the complementary folds and scores the held
/// fold, reporting per-fold AUC with mean and sample standard error. Models
/// are saved as `<kind>_fold<f>.json` when `models_dir` is given.
pub fn run_five_fold(
    manifest: &Manifest,
    features_dir: &Path,
    models_dir: Option<&Path>,
    kind: ModelKind,
    train_cfg: &TrainConfig,
    k: u32,
) -> Result<FoldReport, PipelineError> {
    manifest.validate_folds().map_err(|_| PipelineError::MissingFolds)?;
    if let Some(dir) = models_dir {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }

    let mut per_fold = Vec::with_capacity(k as usize);
    for fold in 1..=k {
        let mut ds = FrameDataset::new(3 * 13);
        let mut ds_width_set = false;
        let mut held_out = Vec::new();
        for entry in manifest.dev_entries() {
            if entry.fold == Some(fold) {
                held_out.push(entry);
                continue;
            }
            let features = load_features(features_dir, &entry.id)?;
            if !ds_width_set {
                ds = FrameDataset::new(features.width());
                ds_width_set = true;
            }
            ds.push_recording(&features, entry.label.is_positive());
        }
        let fold_cfg = TrainConfig {
            seed: Rng::new(train_cfg.seed).fork(u64::from(fold)).next_u64(),
            ..*train_cfg
        };
        let model = train(kind, &ds, &fold_cfg)?;
        if let Some(dir) = models_dir {
            save_model(dir.join(format!("{kind}_fold{fold}.json")), &model, &fold_cfg)?;
        }

        let mut scores = ScoreFile::new();
        let mut labels = std::collections::BTreeMap::new();
        for entry in held_out {
            let features = load_features(features_dir, &entry.id)?;
            let score = score_recording(&model, &features)?;
            scores.insert(entry.id.clone(), score.clamp(0.0, 1.0));
            labels.insert(entry.id.clone(), entry.label);
        }
        per_fold.push(metrics_report(&scores, &labels)?);
    }

    let per_fold_auc: Vec<f64> = per_fold.iter().map(|m| m.auc).collect();
    let kf = per_fold_auc.len() as f64;
    let mean_auc = per_fold_auc.iter().sum::<f64>() / kf;
    let std_err = if per_fold_auc.len() > 1 {
        let var = per_fold_auc
            .iter()
            .map(|a| (a - mean_auc).powi(2))
            .sum::<f64>()
            / (kf - 1.0);
        (var / kf).sqrt()
    } else {
        0.0
    };
    Ok(FoldReport {
        model: kind,
        per_fold,
        per_fold_auc,
        mean_auc,
        std_err,
    })
}

/// Loads the `k` fold models of `kind` from `models_dir`.
pub fn load_fold_models(
    models_dir: &Path,
    kind: ModelKind,
    k: u32,
) -> Result<Vec<Model>, PipelineError> {
    (1..=k)
        .map(|fold| {
            let path = models_dir.join(format!("{kind}_fold{fold}.json"));
            if !path.exists() {
                return Err(PipelineError::MissingModel { path });
            }
            Ok(load_model::<f64>(&path)?.0)
        })
        .collect()
}

/// Scores every test recording with the fold ensemble.
pub fn run_test_scoring(
    manifest: &Manifest,
    features_dir: &Path,
    models_dir: &Path,
    kind: ModelKind,
    k: u32,
) -> Result<ScoreFile, PipelineError> {
    let test_ids: Vec<&str> = manifest.test_entries().map(|e| e.id.as_str()).collect();
    let mut scores = ScoreFile::new();
    if test_ids.is_empty() {
        return Ok(scores);
    }
    let models = load_fold_models(models_dir, kind, k)?;
    for id in test_ids {
        let features = load_features(features_dir, id)?;
        let score = ensemble_score(&models, &features)?;
        scores.insert(id, score.clamp(0.0, 1.0));
    }
    Ok(scores)
}

/// Labels of the manifest entries in the requested split (`all` = both).
pub fn labels_for_split(
    manifest: &Manifest,
    split: &str,
) -> Result<std::collections::BTreeMap<String, Label>, PipelineError> {
    let filter: Option<Split> = match split {
        "dev" => Some(Split::Dev),
        "test" => Some(Split::Test),
        "all" => None,
        other => {
            return Err(PipelineError::UnknownSplit {
                value: other.to_string(),
            })
        }
    };
    Ok(manifest
        .entries
        .iter()
        .filter(|e| filter.is_none_or(|s| e.split == s))
        .map(|e| (e.id.clone(), e.label))
        .collect())
}

/// Evaluates a score file against manifest labels.
pub fn eval_scores(
    scores: &ScoreFile,
    manifest: &Manifest,
    split: &str,
) -> Result<MetricsReport, PipelineError> {
    let labels = labels_for_split(manifest, split)?;
    Ok(metrics_report(scores, &labels)?)
}

/// Calibrates and fuses any number of aligned score files.
pub fn run_fusion(inputs: &[ScoreFile]) -> Result<ScoreFile, PipelineError> {
    let matrix = TeamScoreMatrix::from_score_files(inputs)?;
    Ok(fuse_mean(&matrix)?)
}
