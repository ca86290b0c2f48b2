//! Minimal RIFF/WAVE reader and writer for 16-bit integer PCM.
//!
//! Only the subset the pipeline ingests is supported: little-endian RIFF,
//! format tag 1 (integer PCM), 16 bits per sample, one or two channels, any
//! sample rate. Everything else is rejected with a descriptive error rather
//! than decoded approximately.

use std::path::Path;

use crate::scalar::{real, Real};

use super::{AudioError, Waveform};

fn malformed(path: &Path, reason: impl Into<String>) -> AudioError {
    AudioError::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn unsupported(path: &Path, detail: impl Into<String>) -> AudioError {
    AudioError::UnsupportedEncoding {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn u16_le(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn u32_le(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Decodes a 16-bit PCM WAV file into a mono waveform.
///
/// Stereo files are mixed down by averaging the two channels. Samples are
/// scaled to `[-1, 1]` by `1/32768`.
pub fn read_pcm_wav<R: Real>(path: impl AsRef<Path>) -> Result<Waveform<R>, AudioError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| AudioError::Io {
        path: path.to_path_buf(),
        source,
    })?;

    if bytes.len() < 12 {
        return Err(malformed(path, "file shorter than RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed(path, "missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed(path, "missing WAVE form type"));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut off = 12usize;
    while off + 8 <= bytes.len() {
        let id = &bytes[off..off + 4];
        let size = u32_le(&bytes[off + 4..off + 8]) as usize;
        let body_start = off + 8;
        let body_end = body_start
            .checked_add(size)
            .ok_or_else(|| malformed(path, "chunk size overflow"))?;
        if body_end > bytes.len() {
            return Err(malformed(
                path,
                format!("truncated '{}' chunk", String::from_utf8_lossy(id)),
            ));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(malformed(path, "fmt chunk shorter than 16 bytes"));
                }
                fmt = Some((
                    u16_le(&body[0..2]),
                    u16_le(&body[2..4]),
                    u32_le(&body[4..8]),
                    u16_le(&body[14..16]),
                ));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        off = body_end + (size & 1);
    }

    let (format, channels, rate, bits) = fmt.ok_or_else(|| malformed(path, "missing fmt chunk"))?;
    if format != 1 {
        return Err(unsupported(path, format!("format tag {format}")));
    }
    if bits != 16 {
        return Err(unsupported(path, format!("{bits}-bit samples")));
    }
    if channels == 0 || channels > 2 {
        return Err(unsupported(path, format!("{channels} channels")));
    }
    if rate == 0 {
        return Err(malformed(path, "zero sample rate"));
    }
    let data = data.ok_or_else(|| malformed(path, "missing data chunk"))?;
    let block = 2 * channels as usize;
    if data.len() % block != 0 {
        return Err(malformed(path, "data chunk not a whole number of frames"));
    }

    let n = data.len() / block;
    let mut samples = Vec::with_capacity(n);
    for frame in data.chunks_exact(block) {
        let v = if channels == 1 {
            i16::from_le_bytes([frame[0], frame[1]]) as f64
        } else {
            let l = i16::from_le_bytes([frame[0], frame[1]]) as f64;
            let r = i16::from_le_bytes([frame[2], frame[3]]) as f64;
            (l + r) / 2.0
        };
        samples.push(real::<R>(v / 32768.0));
    }
    Ok(Waveform::new(samples, rate))
}

/// Writes a mono waveform as a 16-bit PCM WAV file.
///
/// Samples are clamped to `[-1, 1]` and quantized by `round(x * 32768)`,
/// saturating at the i16 limits. The byte output is a pure function of the
/// samples and rate.
pub fn write_pcm_wav<R: Real>(path: impl AsRef<Path>, w: &Waveform<R>) -> Result<(), AudioError> {
    let path = path.as_ref();
    let n = w.samples.len();
    let data_len = (n * 2) as u32;
    let mut bytes = Vec::with_capacity(44 + n * 2);
    bytes.extend_from_slice(b"RIFF");
    bytes.extend_from_slice(&(36 + data_len).to_le_bytes());
    bytes.extend_from_slice(b"WAVE");
    bytes.extend_from_slice(b"fmt ");
    bytes.extend_from_slice(&16u32.to_le_bytes());
    bytes.extend_from_slice(&1u16.to_le_bytes()); // integer PCM
    bytes.extend_from_slice(&1u16.to_le_bytes()); // mono
    bytes.extend_from_slice(&w.rate.to_le_bytes());
    bytes.extend_from_slice(&(w.rate * 2).to_le_bytes()); // byte rate
    bytes.extend_from_slice(&2u16.to_le_bytes()); // block align
    bytes.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    bytes.extend_from_slice(b"data");
    bytes.extend_from_slice(&data_len.to_le_bytes());
    for &s in &w.samples {
        let x = s.to_f64().unwrap_or(0.0).clamp(-1.0, 1.0);
        let q = (x * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        bytes.extend_from_slice(&q.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|source| AudioError::Io {
        path: path.to_path_buf(),
        source,
    })
}
