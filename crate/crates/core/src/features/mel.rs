//! Triangular mel filterbank on the HTK mel scale.

use crate::scalar::{real, Real};

/// HTK mel scale: `2595 * log10(1 + f / 700)`.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Bank of unit-height triangular filters over FFT power bins.
#[derive(Debug, Clone)]
pub struct MelFilterbank<R: Real = f64> {
    /// Per filter: first covered bin and the weight of each covered bin.
    filters: Vec<(usize, Vec<R>)>,
    centers_hz: Vec<f64>,
}

impl<R: Real> MelFilterbank<R> {
    /// Builds `n_filters` triangles spanning `fmin..fmax` mel-uniformly for
    /// an FFT of `n_fft` points at `rate` Hz.
    pub fn new(n_filters: usize, n_fft: usize, rate: u32, fmin: f64, fmax: f64) -> Self {
        assert!(n_filters > 0);
        assert!(
            fmax <= rate as f64 / 2.0 + 1e-9,
            "fmax {fmax} above Nyquist for rate {rate}"
        );
        let n_bins = n_fft / 2 + 1;
        let bin_hz = rate as f64 / n_fft as f64;
        let mel_lo = hz_to_mel(fmin);
        let mel_hi = hz_to_mel(fmax);
        let edges: Vec<f64> = (0..n_filters + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_filters + 1) as f64))
            .collect();

        let mut filters = Vec::with_capacity(n_filters);
        let mut centers_hz = Vec::with_capacity(n_filters);
        for f in 0..n_filters {
            let (left, center, right) = (edges[f], edges[f + 1], edges[f + 2]);
            centers_hz.push(center);
            let mut start = None;
            let mut weights = Vec::new();
            for bin in 0..n_bins {
                let freq = bin as f64 * bin_hz;
                let w = if freq <= left || freq >= right {
                    0.0
                } else if freq <= center {
                    (freq - left) / (center - left)
                } else {
                    (right - freq) / (right - center)
                };
                if w > 0.0 {
                    if start.is_none() {
                        start = Some(bin);
                    }
                    weights.push(real::<R>(w));
                } else if start.is_some() {
                    break;
                }
            }
            filters.push((start.unwrap_or(0), weights));
        }
        MelFilterbank {
            filters,
            centers_hz,
        }
    }

    pub fn n_filters(&self) -> usize {
        self.filters.len()
    }

    /// Center frequency of each triangle in Hz.
    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    /// Filter energies for one magnitude-squared spectrum.
    pub fn apply(&self, power: &[R]) -> Vec<R> {
        self.filters
            .iter()
            .map(|(start, weights)| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| power[start + i] * w)
                    .fold(R::zero(), |acc, v| acc + v)
            })
            .collect()
    }
}
