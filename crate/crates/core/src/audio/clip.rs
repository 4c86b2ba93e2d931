use crate::error::{arg_err, Result};

/// Sample rates accepted by [`AudioClip`].
pub const SUPPORTED_RATES: [u32; 5] = [8000, 16000, 22050, 44100, 48000];

/// Normalized mono PCM audio.
///
/// Every sample lies in `[-1, 1]` and the clip is never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if !SUPPORTED_RATES.contains(&sample_rate_hz) {
            return arg_err(format!("unsupported sample rate {sample_rate_hz} Hz"));
        }
        if samples.is_empty() {
            return arg_err("audio clip has no samples");
        }
        if let Some(pos) = samples.iter().position(|s| !(-1.0..=1.0).contains(s)) {
            return arg_err(format!(
                "sample {pos} = {} outside [-1, 1]",
                samples[pos]
            ));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Builds a clip from arbitrary processing output, clamping to `[-1, 1]`
    /// and mapping non-finite values to zero.
    pub fn from_unclamped(mut samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        for s in &mut samples {
            *s = if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 };
        }
        Self::new(samples, sample_rate_hz)
    }

    pub fn silence(num_samples: usize, sample_rate_hz: u32) -> Result<Self> {
        Self::new(vec![0.0; num_samples], sample_rate_hz)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Number of samples spanned by `ms` milliseconds at this clip's rate (rounded).
    pub fn ms_to_samples(&self, ms: f64) -> usize {
        ms_to_samples(ms, self.sample_rate_hz)
    }

    /// Copies `[start, end)` into a new clip.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.samples.len() {
            return arg_err(format!(
                "invalid slice [{start}, {end}) of {} samples",
                self.samples.len()
            ));
        }
        Ok(Self {
            samples: self.samples[start..end].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }
}

pub(crate) fn ms_to_samples(ms: f64, sample_rate_hz: u32) -> usize {
    (ms * sample_rate_hz as f64 / 1000.0).round() as usize
}
