use serde::{Deserialize, Serialize};

use super::clip::ms_to_samples;
use super::fft::{fft_frame, hann_window, MIN_FFT_SIZE};
use super::AudioClip;
use crate::error::{arg_err, Error, Result};

/// Lowest value a log-magnitude feature can take, in dB relative to a
/// full-scale sinusoid.
pub const LOG_FLOOR_DB: f64 = -80.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureNormalization {
    /// Raw floored log magnitude.
    #[default]
    Raw,
    /// Subtract the per-bin mean over the utterance.
    UtteranceMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    pub window_ms: f64,
    pub hop_ms: f64,
    #[serde(default)]
    pub normalization: FeatureNormalization,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_ms: 25.0,
            hop_ms: 10.0,
            normalization: FeatureNormalization::Raw,
        }
    }
}

/// Row-major matrix of per-frame log-magnitude spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    dim: usize,
    window_ms: f64,
    hop_ms: f64,
    sample_rate_hz: u32,
}

impl FeatureMatrix {
    pub fn from_rows(
        rows: Vec<Vec<f64>>,
        window_ms: f64,
        hop_ms: f64,
        sample_rate_hz: u32,
    ) -> Result<Self> {
        let dim = match rows.first() {
            Some(r) if !r.is_empty() => r.len(),
            _ => return arg_err("feature matrix needs at least one nonempty row"),
        };
        if rows.iter().any(|r| r.len() != dim) {
            return arg_err("feature rows have differing lengths");
        }
        Ok(Self {
            data: rows.into_iter().flatten().collect(),
            dim,
            window_ms,
            hop_ms,
            sample_rate_hz,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn window_ms(&self) -> f64 {
        self.window_ms
    }

    pub fn hop_ms(&self) -> f64 {
        self.hop_ms
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Rows `[start, end)` as a new matrix with the same framing metadata.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.num_rows() {
            return arg_err(format!(
                "row range [{start}, {end}) out of {} rows",
                self.num_rows()
            ));
        }
        Ok(Self {
            data: self.data[start * self.dim..end * self.dim].to_vec(),
            ..*self
        })
    }
}

/// Hann-windowed log-magnitude STFT with the default (raw) normalization.
pub fn stft(clip: &AudioClip, window_ms: f64, hop_ms: f64) -> Result<FeatureMatrix> {
    stft_with(
        clip,
        &StftConfig {
            window_ms,
            hop_ms,
            ..StftConfig::default()
        },
    )
}

/// Each frame is zero-padded to the next power of two. Magnitudes are
/// expressed in dB relative to the peak a full-scale sinusoid produces under
/// the same window, then floored at [`LOG_FLOOR_DB`].
pub fn stft_with(clip: &AudioClip, config: &StftConfig) -> Result<FeatureMatrix> {
    if !(config.hop_ms > 0.0 && config.window_ms >= config.hop_ms) {
        return arg_err(format!(
            "need window_ms >= hop_ms > 0, got {} / {}",
            config.window_ms, config.hop_ms
        ));
    }
    let rate = clip.sample_rate_hz();
    let win = ms_to_samples(config.window_ms, rate).max(1);
    let hop = ms_to_samples(config.hop_ms, rate).max(1);
    let samples = clip.samples();
    if samples.len() < win {
        return Err(Error::EmptyMatrix {
            samples: samples.len(),
            window: win,
        });
    }
    let fft_size = win.next_power_of_two().max(MIN_FFT_SIZE);
    let window = hann_window(win);
    let reference = window.iter().sum::<f64>() / 2.0;
    let num_rows = 1 + (samples.len() - win) / hop;
    let dim = fft_size / 2 + 1;

    let mut data = Vec::with_capacity(num_rows * dim);
    let mut frame = vec![0.0; fft_size];
    for r in 0..num_rows {
        let start = r * hop;
        for (i, (f, w)) in frame.iter_mut().zip(&window).enumerate() {
            *f = samples[start + i] * w;
        }
        let spec = fft_frame(&frame, rate)?;
        data.extend(spec.bins().iter().map(|c| {
            let db = 20.0 * (c.norm() / reference).log10();
            if db.is_nan() {
                LOG_FLOOR_DB
            } else {
                db.max(LOG_FLOOR_DB)
            }
        }));
    }

    if config.normalization == FeatureNormalization::UtteranceMean {
        let mut mean = vec![0.0; dim];
        for row in data.chunks_exact(dim) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= num_rows as f64;
        }
        for row in data.chunks_exact_mut(dim) {
            for (v, m) in row.iter_mut().zip(&mean) {
                *v -= m;
            }
        }
    }

    Ok(FeatureMatrix {
        data,
        dim,
        window_ms: config.window_ms,
        hop_ms: config.hop_ms,
        sample_rate_hz: rate,
    })
}
