//! Audio ingestion and preprocessing.
//!
//! The preprocessing chain applied to every recording before feature
//! extraction is:
//!
//! 1. resample to 44.1 kHz ([`resample`]),
//! 2. peak amplitude normalization ([`normalize_amplitude`]),
//! 3. edge trimming to drop abrupt start/end activity ([`trim_edges`]),
//! 4. sound-activity filtering that excises low-amplitude regions
//!    ([`sound_activity_filter`]).
//!
//! Trimming runs before activity filtering so that start/end clicks cannot
//! pull surrounding silence into the kept region via the activity buffer.
//! Recordings shorter than the minimum duration are rejected outright, and
//! recordings with less than one analysis frame of activity left after the
//! chain are rejected as silent.

mod wav;

use std::path::PathBuf;

use thiserror::Error;

use crate::scalar::{real, Real};

pub use wav::{read_pcm_wav, write_pcm_wav};

/// Minimum number of samples the preprocessed signal must retain: one
/// analysis frame at the feature extractor's default frame length.
pub const MIN_ANALYSIS_SAMPLES: usize = 1024;

/// Sample rate every recording is converted to before analysis.
pub const TARGET_RATE: u32 = 44_100;

/// Mono audio signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<R: Real = f64> {
    /// Samples in `[-1, 1]`.
    pub samples: Vec<R>,
    /// Samples per second.
    pub rate: u32,
}

impl<R: Real> Waveform<R> {
    pub fn new(samples: Vec<R>, rate: u32) -> Self {
        assert!(rate > 0, "sample rate must be positive");
        Waveform { samples, rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_ms(&self) -> f64 {
        self.samples.len() as f64 * 1000.0 / self.rate as f64
    }
}

/// Parameters of the preprocessing chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Absolute amplitude below which a sample counts as silence.
    pub sad_threshold: f64,
    /// Samples within this distance of an active sample are kept.
    pub sad_buffer_ms: f64,
    /// Removed from each end of the recording.
    pub edge_trim_ms: f64,
    /// Recordings shorter than this are discarded.
    pub min_duration_ms: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            sad_threshold: 0.01,
            sad_buffer_ms: 50.0,
            edge_trim_ms: 20.0,
            min_duration_ms: 500.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed WAV file {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("unsupported WAV encoding in {path}: {detail} (expected 16-bit integer PCM, 1 or 2 channels)")]
    UnsupportedEncoding { path: PathBuf, detail: String },
    #[error("recording too short: {got_ms:.1} ms, minimum is {min_ms:.1} ms")]
    TooShort { got_ms: f64, min_ms: f64 },
    #[error("no activity: {remaining} samples left after preprocessing, need at least {needed}")]
    NoActivity { remaining: usize, needed: usize },
    #[error("expected {expected} Hz input, got {rate} Hz (resample first)")]
    UnexpectedRate { rate: u32, expected: u32 },
}

/// Linear-interpolation resampling to `target_rate`.
///
/// The output length is `round(len * target / source)`; sample `i` of the
/// output reads the source at position `i * source / target`, clamping past
/// the final sample. Equal rates return the input unchanged.
pub fn resample<R: Real>(w: &Waveform<R>, target_rate: u32) -> Waveform<R> {
    assert!(target_rate > 0, "target rate must be positive");
    if target_rate == w.rate {
        return w.clone();
    }
    let src_len = w.samples.len();
    let out_len =
        (src_len as f64 * target_rate as f64 / w.rate as f64).round() as usize;
    let mut samples = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let pos = i as f64 * w.rate as f64 / target_rate as f64;
        let i0 = pos.floor() as usize;
        let frac = pos - i0 as f64;
        let v = if i0 + 1 < src_len {
            let s0 = w.samples[i0];
            let s1 = w.samples[i0 + 1];
            s0 + (s1 - s0) * real::<R>(frac)
        } else {
            w.samples[src_len.min(i0 + 1) - 1]
        };
        samples.push(v);
    }
    Waveform::new(samples, target_rate)
}

/// Scales the signal so its absolute peak is 1. All-zero input is returned
/// unchanged.
pub fn normalize_amplitude<R: Real>(w: &Waveform<R>) -> Waveform<R> {
    let peak = w
        .samples
        .iter()
        .fold(R::zero(), |acc, &s| acc.max(s.abs()));
    if peak == R::zero() {
        return w.clone();
    }
    Waveform::new(w.samples.iter().map(|&s| s / peak).collect(), w.rate)
}

/// Keeps exactly the samples within `buffer_ms` of some sample whose
/// absolute amplitude reaches `threshold`; kept samples are concatenated in
/// order. May return an empty waveform.
pub fn sound_activity_filter<R: Real>(
    w: &Waveform<R>,
    threshold: f64,
    buffer_ms: f64,
) -> Waveform<R> {
    let n = w.samples.len();
    if n == 0 {
        return w.clone();
    }
    let buffer = (buffer_ms * w.rate as f64 / 1000.0).round() as i64;
    let thr = real::<R>(threshold);

    // Distance to the nearest active sample, forward then backward pass.
    let mut dist = vec![i64::MAX; n];
    let mut last_active: Option<i64> = None;
    for (i, d) in dist.iter_mut().enumerate() {
        if w.samples[i].abs() >= thr {
            last_active = Some(i as i64);
        }
        if let Some(a) = last_active {
            *d = i as i64 - a;
        }
    }
    last_active = None;
    for i in (0..n).rev() {
        if w.samples[i].abs() >= thr {
            last_active = Some(i as i64);
        }
        if let Some(a) = last_active {
            dist[i] = dist[i].min(a - i as i64);
        }
    }

    let samples: Vec<R> = (0..n)
        .filter(|&i| dist[i] <= buffer)
        .map(|i| w.samples[i])
        .collect();
    Waveform::new(samples, w.rate)
}

/// Removes `edge_trim_ms` from each end; returns an empty waveform when the
/// trims meet or overlap.
pub fn trim_edges<R: Real>(w: &Waveform<R>, edge_trim_ms: f64) -> Waveform<R> {
    let t = (edge_trim_ms * w.rate as f64 / 1000.0).round() as usize;
    if 2 * t >= w.samples.len() {
        return Waveform::new(Vec::new(), w.rate);
    }
    Waveform::new(w.samples[t..w.samples.len() - t].to_vec(), w.rate)
}

/// Full preprocessing chain: duration gate, normalize, trim, activity
/// filter, activity gate.
///
/// The input must already be at [`TARGET_RATE`].
pub fn preprocess<R: Real>(
    w: &Waveform<R>,
    cfg: &PreprocessConfig,
) -> Result<Waveform<R>, AudioError> {
    if w.rate != TARGET_RATE {
        return Err(AudioError::UnexpectedRate {
            rate: w.rate,
            expected: TARGET_RATE,
        });
    }
    let got_ms = w.duration_ms();
    if got_ms < cfg.min_duration_ms {
        return Err(AudioError::TooShort {
            got_ms,
            min_ms: cfg.min_duration_ms,
        });
    }
    let normalized = normalize_amplitude(w);
    let trimmed = trim_edges(&normalized, cfg.edge_trim_ms);
    let filtered = sound_activity_filter(&trimmed, cfg.sad_threshold, cfg.sad_buffer_ms);
    if filtered.len() < MIN_ANALYSIS_SAMPLES {
        return Err(AudioError::NoActivity {
            remaining: filtered.len(),
            needed: MIN_ANALYSIS_SAMPLES,
        });
    }
    Ok(filtered)
}
