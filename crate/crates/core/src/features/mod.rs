//! Frame-level MFCC+Δ+ΔΔ feature extraction.
//!
//! Each preprocessed waveform is cut into 1024-sample frames with a
//! 441-sample hop, and every frame goes through Hann window → 1024-point
//! magnitude-squared spectrum → 40 triangular mel filters (HTK scale) →
//! natural log with an absolute floor → orthonormal DCT-II, keeping the
//! first 13 coefficients including the 0th. First and second temporal
//! regression coefficients are appended, giving 39 values per frame.

pub mod dct;
pub mod fft;
pub mod mel;

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::Waveform;
use crate::scalar::{real, real_of, Real};

use mel::MelFilterbank;

/// Feature extraction parameters. Defaults reproduce the 39-dimensional
/// setup used throughout this workspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfccConfig {
    /// Analysis frame length in samples (also the FFT size).
    pub frame_len: usize,
    /// Hop between frame starts in samples.
    pub hop: usize,
    /// Number of triangular mel filters.
    pub n_mels: usize,
    /// Cepstral coefficients kept per frame, counting the 0th.
    pub n_coeffs: usize,
    /// Lower edge of the filterbank in Hz.
    pub fmin: f64,
    /// Upper edge of the filterbank in Hz.
    pub fmax: f64,
    /// Absolute floor applied to filter energies before the log.
    pub log_floor: f64,
    /// Half-width of the delta regression window in frames.
    pub delta_halfwidth: usize,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            frame_len: 1024,
            hop: 441,
            n_mels: 40,
            n_coeffs: 13,
            fmin: 0.0,
            fmax: 22050.0,
            log_floor: 1e-10,
            delta_halfwidth: 2,
        }
    }
}

impl MfccConfig {
    /// Feature width: static plus delta plus delta-delta.
    pub fn width(&self) -> usize {
        3 * self.n_coeffs
    }

    fn check(&self, rate: u32) {
        assert!(self.frame_len.is_power_of_two(), "frame_len must be a power of two");
        assert!(self.hop > 0 && self.hop <= self.frame_len, "hop must be in 1..=frame_len");
        assert!(self.n_coeffs >= 1 && self.n_coeffs <= self.n_mels);
        assert!(self.fmax <= rate as f64 / 2.0 + 1e-9, "fmax above Nyquist");
        assert!(self.log_floor > 0.0);
    }
}

/// Per-frame features for one recording, row-major `T x width`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<R: Real = f64> {
    pub recording_id: String,
    data: Vec<R>,
    n_rows: usize,
    width: usize,
}

impl<R: Real> FeatureMatrix<R> {
    pub fn from_rows(recording_id: impl Into<String>, rows: Vec<Vec<R>>) -> Self {
        let n_rows = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * width);
        for row in rows {
            assert_eq!(row.len(), width, "ragged feature rows");
            data.extend(row);
        }
        FeatureMatrix {
            recording_id: recording_id.into(),
            data,
            n_rows,
            width,
        }
    }

    pub fn n_frames(&self) -> usize {
        self.n_rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[R]> {
        self.data.chunks_exact(self.width)
    }

    /// Writes one row per frame, comma-separated, no header. Values use the
    /// shortest representation that parses back to the same scalar.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        let path = path.as_ref();
        let io_err = |source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        let mut line = String::new();
        for row in self.rows() {
            line.clear();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v}"));
            }
            line.push('\n');
            out.write_all(line.as_bytes()).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    /// Reads a matrix written by [`FeatureMatrix::write_csv`].
    pub fn read_csv(
        path: impl AsRef<Path>,
        recording_id: impl Into<String>,
    ) -> Result<Self, FeatureError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut rows: Vec<Vec<R>> = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| FeatureError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<R>, _> = line
                .split(',')
                .map(|tok| {
                    tok.parse::<f64>()
                        .map(real::<R>)
                        .map_err(|_| FeatureError::Csv {
                            path: path.to_path_buf(),
                            line: lineno + 1,
                        })
                })
                .collect();
            rows.push(row?);
        }
        if rows.is_empty() {
            return Err(FeatureError::EmptyMatrix {
                path: path.to_path_buf(),
            });
        }
        Ok(FeatureMatrix::from_rows(recording_id, rows))
    }
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("signal too short to frame: {len} samples, frame length {frame_len}")]
    TooShort { len: usize, frame_len: usize },
    #[error("feature I/O failed for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad feature CSV {path} at line {line}")]
    Csv { path: PathBuf, line: usize },
    #[error("feature CSV {path} has no rows")]
    EmptyMatrix { path: PathBuf },
}

/// Number of frames produced by [`frame_signal`] for a signal of `len`
/// samples, when it fits at least one frame.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    (len - frame_len) / hop + 1
}

/// Splits a waveform into frames starting at `0, hop, 2*hop, ...`; the
/// incomplete tail is dropped.
pub fn frame_signal<R: Real>(
    w: &Waveform<R>,
    frame_len: usize,
    hop: usize,
) -> Result<Vec<&[R]>, FeatureError> {
    assert!(frame_len > 0 && hop > 0);
    let len = w.samples.len();
    if len < frame_len {
        return Err(FeatureError::TooShort { len, frame_len });
    }
    let count = frame_count(len, frame_len, hop);
    Ok((0..count)
        .map(|t| &w.samples[t * hop..t * hop + frame_len])
        .collect())
}

fn hann_window<R: Real>(n: usize) -> Vec<R> {
    (0..n)
        .map(|i| {
            real::<R>(0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos()))
        })
        .collect()
}

/// Static MFCCs for a list of frames: `T x n_coeffs`.
pub fn mfcc<R: Real>(frames: &[&[R]], cfg: &MfccConfig, rate: u32) -> Vec<Vec<R>> {
    assert!(!frames.is_empty(), "mfcc needs at least one frame");
    cfg.check(rate);
    let window = hann_window::<R>(cfg.frame_len);
    let bank: MelFilterbank<R> =
        MelFilterbank::new(cfg.n_mels, cfg.frame_len, rate, cfg.fmin, cfg.fmax);
    let floor = real::<R>(cfg.log_floor);
    frames
        .iter()
        .map(|frame| {
            assert_eq!(frame.len(), cfg.frame_len, "frame length mismatch");
            let windowed: Vec<R> = frame
                .iter()
                .zip(window.iter())
                .map(|(&s, &w)| s * w)
                .collect();
            let power = fft::power_spectrum(&windowed);
            let log_energies: Vec<R> = bank
                .apply(&power)
                .into_iter()
                .map(|e| e.max(floor).ln())
                .collect();
            dct::dct2(&log_energies, cfg.n_coeffs)
        })
        .collect()
}

/// Appends Δ and ΔΔ regression coefficients: `T x C` in, `T x 3C` out.
///
/// `d_t = sum_{n=1..N} n * (c_{t+n} - c_{t-n}) / (2 * sum n^2)`, indices
/// clamped to the matrix edges, applied once for Δ and again on Δ for ΔΔ.
pub fn append_deltas<R: Real>(static_rows: &[Vec<R>], halfwidth: usize) -> Vec<Vec<R>> {
    assert!(!static_rows.is_empty());
    assert!(halfwidth >= 1);
    let deltas = regress(static_rows, halfwidth);
    let delta_deltas = regress(&deltas, halfwidth);
    static_rows
        .iter()
        .zip(deltas.iter())
        .zip(delta_deltas.iter())
        .map(|((s, d), dd)| {
            let mut row = Vec::with_capacity(3 * s.len());
            row.extend_from_slice(s);
            row.extend_from_slice(d);
            row.extend_from_slice(dd);
            row
        })
        .collect()
}

fn regress<R: Real>(rows: &[Vec<R>], halfwidth: usize) -> Vec<Vec<R>> {
    let t_max = rows.len() as i64 - 1;
    let denom: usize = (1..=halfwidth).map(|n| 2 * n * n).sum();
    let denom = real_of::<R>(denom);
    let width = rows[0].len();
    (0..rows.len() as i64)
        .map(|t| {
            (0..width)
                .map(|c| {
                    let mut acc = R::zero();
                    for n in 1..=halfwidth as i64 {
                        let ahead = rows[(t + n).clamp(0, t_max) as usize][c];
                        let behind = rows[(t - n).clamp(0, t_max) as usize][c];
                        acc = acc + real_of::<R>(n as usize) * (ahead - behind);
                    }
                    acc / denom
                })
                .collect()
        })
        .collect()
}

/// Full per-recording feature extraction: frame → MFCC → Δ/ΔΔ.
pub fn extract_features<R: Real>(
    w: &Waveform<R>,
    cfg: &MfccConfig,
    recording_id: impl Into<String>,
) -> Result<FeatureMatrix<R>, FeatureError> {
    let frames = frame_signal(w, cfg.frame_len, cfg.hop)?;
    let static_rows = mfcc(&frames, cfg, w.rate);
    let rows = append_deltas(&static_rows, cfg.delta_halfwidth);
    Ok(FeatureMatrix::from_rows(recording_id, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wave(samples: Vec<f64>) -> Waveform {
        Waveform::new(samples, 44100)
    }

    #[test]
    fn frame_counts_match_closed_form() {
        let w = wave(vec![0.1; 1024]);
        assert_eq!(frame_signal(&w, 1024, 441).unwrap().len(), 1);

        let w = wave(vec![0.1; 1906]); // 1024 + 2*441
        assert_eq!(frame_signal(&w, 1024, 441).unwrap().len(), 3);
    }

    #[test]
    fn framing_rejects_short_signal() {
        let w = wave(vec![0.1; 1023]);
        assert!(matches!(
            frame_signal(&w, 1024, 441),
            Err(FeatureError::TooShort { len: 1023, .. })
        ));
    }

    #[test]
    fn zero_frame_yields_floor_cepstrum() {
        let cfg = MfccConfig::default();
        let frame = vec![0.0f64; 1024];
        let out = mfcc(&[&frame], &cfg, 44100);
        let c = &out[0];
        // Every filter energy sits at the floor, so the log vector is
        // constant and only coefficient 0 is nonzero.
        let expect_c0 = 40f64.sqrt() * 1e-10f64.ln();
        assert!((c[0] - expect_c0).abs() < 1e-9, "c0 = {}", c[0]);
        for &v in &c[1..] {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn amplitude_scaling_shifts_only_c0() {
        let cfg = MfccConfig::default();
        // Loud broadband-ish frame keeps every filter above the floor.
        let frame: Vec<f64> = (0..1024)
            .map(|i| 0.4 * (i as f64 * 0.13).sin() + 0.3 * (i as f64 * 1.7).sin())
            .collect();
        let scaled: Vec<f64> = frame.iter().map(|&s| 2.0 * s).collect();
        let a = &mfcc(&[&frame], &cfg, 44100)[0];
        let b = &mfcc(&[&scaled], &cfg, 44100)[0];
        let expect_shift = 40f64.sqrt() * 4f64.ln();
        assert!(
            ((b[0] - a[0]) - expect_shift).abs() < 1e-6,
            "c0 shift = {}",
            b[0] - a[0]
        );
        for k in 1..13 {
            assert!((a[k] - b[k]).abs() < 1e-6, "coefficient {k} moved");
        }
    }

    /// Independent oracle: brute-force DFT plus a re-derived triangle
    /// filterbank, sharing no code with the implementation path.
    fn oracle_mel_energies(frame: &[f64], n_mels: usize, rate: f64) -> (Vec<f64>, Vec<f64>) {
        let n = frame.len();
        let hann: Vec<f64> = (0..n)
            .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos()))
            .collect();
        let x: Vec<f64> = frame.iter().zip(&hann).map(|(s, w)| s * w).collect();
        let power: Vec<f64> = (0..=n / 2)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (t, &v) in x.iter().enumerate() {
                    let ang = -std::f64::consts::TAU * k as f64 * t as f64 / n as f64;
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
                re * re + im * im
            })
            .collect();
        let to_mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
        let from_mel = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
        let hi = to_mel(rate / 2.0);
        let pts: Vec<f64> = (0..n_mels + 2)
            .map(|i| from_mel(hi * i as f64 / (n_mels + 1) as f64))
            .collect();
        let mut energies = vec![0.0; n_mels];
        for (f, e) in energies.iter_mut().enumerate() {
            let (l, c, r) = (pts[f], pts[f + 1], pts[f + 2]);
            for (bin, &p) in power.iter().enumerate() {
                let freq = bin as f64 * rate / n as f64;
                let w = if freq <= l || freq >= r {
                    0.0
                } else if freq <= c {
                    (freq - l) / (c - l)
                } else {
                    (r - freq) / (r - c)
                };
                *e += w * p;
            }
        }
        (energies, pts[1..=n_mels].to_vec())
    }

    #[test]
    fn sine_energy_lands_in_nearest_filter() {
        let rate = 44100.0;
        let frame: Vec<f64> = (0..1024)
            .map(|t| (std::f64::consts::TAU * 1000.0 * t as f64 / rate).sin())
            .collect();

        let (oracle_e, oracle_centers) = oracle_mel_energies(&frame, 40, rate);
        let oracle_argmax = oracle_e
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let nearest = oracle_centers
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - 1000.0).abs().partial_cmp(&(b.1 - 1000.0).abs()).unwrap()
            })
            .unwrap()
            .0;
        assert_eq!(oracle_argmax, nearest, "oracle disagrees with itself");

        // Implementation path must agree with the oracle.
        let windowed: Vec<f64> = {
            let h = hann_window::<f64>(1024);
            frame.iter().zip(&h).map(|(s, w)| s * w).collect()
        };
        let bank: MelFilterbank = MelFilterbank::new(40, 1024, 44100, 0.0, 22050.0);
        let impl_e = bank.apply(&fft::power_spectrum(&windowed));
        let impl_argmax = impl_e
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(impl_argmax, nearest);
        for (a, b) in impl_e.iter().zip(oracle_e.iter()) {
            assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn deltas_of_constants_are_zero() {
        let rows = vec![vec![3.5f64; 13]; 7];
        let out = append_deltas(&rows, 2);
        for row in &out {
            assert_eq!(row.len(), 39);
            for &v in &row[13..] {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn delta_of_ramp_is_one_in_interior() {
        // c_t = t in column 0.
        let rows: Vec<Vec<f64>> = (0..12).map(|t| vec![t as f64]).collect();
        let out = append_deltas(&rows, 2);
        for (t, row) in out.iter().enumerate().take(10).skip(2) {
            assert!((row[1] - 1.0).abs() < 1e-12, "delta at {t}");
        }
        for (t, row) in out.iter().enumerate().take(8).skip(4) {
            assert!(row[2].abs() < 1e-12, "delta-delta at {t}");
        }
    }

    #[test]
    fn single_frame_deltas_are_zero() {
        let rows = vec![vec![1.0f64, -2.0, 0.5]];
        let out = append_deltas(&rows, 2);
        assert_eq!(out[0][3..].to_vec(), vec![0.0; 6]);
    }

    #[test]
    fn extract_has_closed_form_frame_count() {
        let w = wave((0..44100).map(|i| 0.5 * (i as f64 * 0.03).sin()).collect());
        let m = extract_features(&w, &MfccConfig::default(), "rec").unwrap();
        assert_eq!(m.n_frames(), (44100 - 1024) / 441 + 1); // 98
        assert_eq!(m.width(), 39);
        assert!(m.rows().all(|r| r.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn extraction_is_deterministic() {
        let w = wave((0..22050).map(|i| (i as f64 * 0.11).sin()).collect());
        let cfg = MfccConfig::default();
        let a = extract_features(&w, &cfg, "x").unwrap();
        let b = extract_features(&w, &cfg, "x").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaling_leaves_non_c0_columns_unchanged() {
        let cfg = MfccConfig::default();
        // Broadband noise keeps every mel filter far above the log floor in
        // both versions, which the identity requires.
        let mut rng = crate::rng::Rng::new(60);
        let w = wave((0..8820).map(|_| rng.range_f64(-0.8, 0.8)).collect());
        let half = Waveform::new(w.samples.iter().map(|&s| 0.5 * s).collect(), w.rate);
        let a = extract_features(&w, &cfg, "x").unwrap();
        let b = extract_features(&half, &cfg, "x").unwrap();
        assert_eq!(a.n_frames(), b.n_frames());
        for (ra, rb) in a.rows().zip(b.rows()) {
            for c in 1..13 {
                assert!((ra[c] - rb[c]).abs() < 1e-6, "static column {c}");
            }
            for c in 13..39 {
                assert!((ra[c] - rb[c]).abs() < 1e-6, "delta column {c}");
            }
        }
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("feat.csv");
        let w = wave((0..4410).map(|i| (i as f64 * 0.21).sin()).collect());
        let m = extract_features(&w, &MfccConfig::default(), "rec9").unwrap();
        m.write_csv(&path).unwrap();
        let back: FeatureMatrix = FeatureMatrix::read_csv(&path, "rec9").unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn f32_pipeline_is_finite_and_shaped() {
        let w: Waveform<f32> = Waveform::new(
            (0..4410).map(|i| (i as f32 * 0.21).sin() * 0.7).collect(),
            44100,
        );
        let m = extract_features(&w, &MfccConfig::default(), "rec").unwrap();
        assert_eq!(m.width(), 39);
        assert!(m.rows().all(|r| r.iter().all(|v| v.is_finite())));
    }

    proptest! {
        #[test]
        fn frame_count_closed_form_holds(len in 1024usize..60000, hop in 1usize..2000) {
            let w = wave(vec![0.0; len]);
            let frames = frame_signal(&w, 1024, hop).unwrap();
            prop_assert_eq!(frames.len(), (len - 1024) / hop + 1);
            // Every frame is full length and starts on the hop grid.
            for f in frames {
                prop_assert_eq!(f.len(), 1024);
            }
        }
    }
}
