//! Run configuration: defaults, a flat key-value config file, and flag
//! overrides, merged in that order (flags win).
//!
//! The file format is one `key = value` per line with `#` comments:
//!
//! ```text
//! # corpus
//! n_recordings = 200
//! positive_fraction = 0.1
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use covscreen_core::audio::PreprocessConfig;
use covscreen_core::corpus::SynthSpec;
use covscreen_core::features::MfccConfig;
use covscreen_core::models::TrainConfig;

use super::PipelineError;

/// Everything a pipeline run needs besides paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub k_folds: u32,
    pub synth: SynthSpec,
    pub preprocess: PreprocessConfig,
    pub mfcc: MfccConfig,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let seed = 7;
        RunConfig {
            seed,
            k_folds: 5,
            synth: SynthSpec {
                seed,
                ..SynthSpec::default()
            },
            preprocess: PreprocessConfig::default(),
            mfcc: MfccConfig::default(),
            train: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
        }
    }
}

/// Optional per-key overrides collected from command-line flags.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Master seed for synthesis, folds and training.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k_folds: Option<u32>,

    #[arg(long)]
    pub n_recordings: Option<usize>,
    #[arg(long)]
    pub positive_fraction: Option<f64>,
    #[arg(long)]
    pub duration_min_s: Option<f64>,
    #[arg(long)]
    pub duration_max_s: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<u32>,
    #[arg(long)]
    pub test_fraction: Option<f64>,

    #[arg(long)]
    pub sad_threshold: Option<f64>,
    #[arg(long)]
    pub sad_buffer_ms: Option<f64>,
    #[arg(long)]
    pub edge_trim_ms: Option<f64>,
    #[arg(long)]
    pub min_duration_ms: Option<f64>,

    #[arg(long)]
    pub frame_len: Option<usize>,
    #[arg(long)]
    pub hop: Option<usize>,
    #[arg(long)]
    pub n_mels: Option<usize>,
    #[arg(long)]
    pub n_coeffs: Option<usize>,
    #[arg(long)]
    pub fmin: Option<f64>,
    #[arg(long)]
    pub fmax: Option<f64>,
    #[arg(long)]
    pub log_floor: Option<f64>,
    #[arg(long)]
    pub delta_halfwidth: Option<usize>,

    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub l2_lr: Option<f64>,
    #[arg(long)]
    pub l2_mlp: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

impl RunConfig {
    /// Defaults, then the config file (if any), then flag overrides.
    pub fn resolve(config_path: Option<&Path>, overrides: &Overrides) -> Result<Self, PipelineError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = config_path {
            cfg.apply_file(path)?;
        }
        cfg.apply_overrides(overrides);
        cfg.finish();
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut pairs = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| PipelineError::Config {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: "expected 'key = value'".into(),
            })?;
            pairs.insert(key.trim().to_string(), (value.trim().to_string(), idx + 1));
        }
        for (key, (value, line)) in pairs {
            self.apply_pair(&key, &value).map_err(|reason| PipelineError::Config {
                path: path.to_path_buf(),
                line,
                reason,
            })?;
        }
        Ok(())
    }

    fn apply_pair(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("bad value {value:?} for {key}"))
        }
        match key {
            "seed" => self.seed = parse(key, value)?,
            "k_folds" => self.k_folds = parse(key, value)?,
            "n_recordings" => self.synth.n_recordings = parse(key, value)?,
            "positive_fraction" => self.synth.positive_fraction = parse(key, value)?,
            "duration_min_s" => self.synth.duration_range_s.0 = parse(key, value)?,
            "duration_max_s" => self.synth.duration_range_s.1 = parse(key, value)?,
            "sample_rate" => self.synth.sample_rate = parse(key, value)?,
            "test_fraction" => self.synth.test_fraction = parse(key, value)?,
            "sad_threshold" => self.preprocess.sad_threshold = parse(key, value)?,
            "sad_buffer_ms" => self.preprocess.sad_buffer_ms = parse(key, value)?,
            "edge_trim_ms" => self.preprocess.edge_trim_ms = parse(key, value)?,
            "min_duration_ms" => self.preprocess.min_duration_ms = parse(key, value)?,
            "frame_len" => self.mfcc.frame_len = parse(key, value)?,
            "hop" => self.mfcc.hop = parse(key, value)?,
            "n_mels" => self.mfcc.n_mels = parse(key, value)?,
            "n_coeffs" => self.mfcc.n_coeffs = parse(key, value)?,
            "fmin" => self.mfcc.fmin = parse(key, value)?,
            "fmax" => self.mfcc.fmax = parse(key, value)?,
            "log_floor" => self.mfcc.log_floor = parse(key, value)?,
            "delta_halfwidth" => self.mfcc.delta_halfwidth = parse(key, value)?,
            "epochs" => self.train.epochs = parse(key, value)?,
            "learning_rate" => self.train.learning_rate = parse(key, value)?,
            "l2_lr" => self.train.l2_lr = parse(key, value)?,
            "l2_mlp" => self.train.l2_mlp = parse(key, value)?,
            "batch_size" => self.train.batch_size = parse(key, value)?,
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    fn apply_overrides(&mut self, ov: &Overrides) {
        macro_rules! set {
            ($field:expr, $src:expr) => {
                if let Some(v) = $src {
                    $field = v;
                }
            };
        }
        set!(self.seed, ov.seed);
        set!(self.k_folds, ov.k_folds);
        set!(self.synth.n_recordings, ov.n_recordings);
        set!(self.synth.positive_fraction, ov.positive_fraction);
        set!(self.synth.duration_range_s.0, ov.duration_min_s);
        set!(self.synth.duration_range_s.1, ov.duration_max_s);
        set!(self.synth.sample_rate, ov.sample_rate);
        set!(self.synth.test_fraction, ov.test_fraction);
        set!(self.preprocess.sad_threshold, ov.sad_threshold);
        set!(self.preprocess.sad_buffer_ms, ov.sad_buffer_ms);
        set!(self.preprocess.edge_trim_ms, ov.edge_trim_ms);
        set!(self.preprocess.min_duration_ms, ov.min_duration_ms);
        set!(self.mfcc.frame_len, ov.frame_len);
        set!(self.mfcc.hop, ov.hop);
        set!(self.mfcc.n_mels, ov.n_mels);
        set!(self.mfcc.n_coeffs, ov.n_coeffs);
        set!(self.mfcc.fmin, ov.fmin);
        set!(self.mfcc.fmax, ov.fmax);
        set!(self.mfcc.log_floor, ov.log_floor);
        set!(self.mfcc.delta_halfwidth, ov.delta_halfwidth);
        set!(self.train.epochs, ov.epochs);
        set!(self.train.learning_rate, ov.learning_rate);
        set!(self.train.l2_lr, ov.l2_lr);
        set!(self.train.l2_mlp, ov.l2_mlp);
        set!(self.train.batch_size, ov.batch_size);
    }

    /// Propagates the master seed into the nested configs.
    fn finish(&mut self) {
        self.synth.seed = self.seed;
        self.train.seed = self.seed;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults_flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# comment\nn_recordings = 24\nepochs = 9\nseed = 101\n",
        )
        .unwrap();
        let flags = Overrides {
            epochs: Some(3),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(Some(&path), &flags).unwrap();
        assert_eq!(cfg.synth.n_recordings, 24); // from file
        assert_eq!(cfg.train.epochs, 3); // flag wins
        assert_eq!(cfg.seed, 101);
        assert_eq!(cfg.synth.seed, 101, "seed propagates to synthesis");
        assert_eq!(cfg.train.seed, 101);
        assert_eq!(cfg.k_folds, 5); // default
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "epochs = 5\nnrecordings = 7\n").unwrap();
        match RunConfig::resolve(Some(&path), &Overrides::default()) {
            Err(PipelineError::Config { line, reason, .. }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("nrecordings"));
            }
            other => panic!("expected Config error, got {other:?}"),
        }
    }

    #[test]
    fn bad_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "epochs = banana\n").unwrap();
        assert!(RunConfig::resolve(Some(&path), &Overrides::default()).is_err());
    }
}
