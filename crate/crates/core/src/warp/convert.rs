use std::collections::HashMap;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sample_warp_params, Direction, DistortionBand, KindPolicy, SpectralWarper, WarpKind};
use crate::audio::{detect_silence_gaps, fft_frame, ifft_frame, AudioClip, MIN_FFT_SIZE};
use crate::error::{arg_err, Error, Result};
use crate::pitch::{mark_pitch, psola_resynthesize, segment_frames, PitchMarks};

const GAP_FRAME_MS: f64 = 10.0;
const GAP_THRESHOLD_DB: f64 = -40.0;
const GAP_MIN_MS: f64 = 50.0;
const CROSSFADE_MS: f64 = 5.0;
/// Segments never get shorter than the pitch marker's minimum input.
const MIN_SEGMENT_MS: f64 = 50.0;

/// Voice-conversion settings, serialized with flat keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConversionConfig {
    pub band_lo: f64,
    pub band_hi: f64,
    pub direction: Direction,
    pub policy: KindPolicy,
    pub seed: u64,
    pub fft_size: usize,
    pub segment_randomization: bool,
    pub segment_len_range_ms: (f64, f64),
}

impl Default for ConversionConfig {
    fn default() -> Self {
        let band = DistortionBand::default();
        Self {
            band_lo: band.lo,
            band_hi: band.hi,
            direction: band.direction,
            policy: KindPolicy::Compound,
            seed: 0,
            fft_size: 512,
            segment_randomization: false,
            segment_len_range_ms: (1000.0, 3000.0),
        }
    }
}

impl ConversionConfig {
    pub fn band(&self) -> DistortionBand {
        DistortionBand {
            lo: self.band_lo,
            hi: self.band_hi,
            direction: self.direction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.band().validate()?;
        if !self.fft_size.is_power_of_two() || self.fft_size < 256 {
            return Err(Error::Configuration(format!(
                "fft_size {} must be a power of two >= 256",
                self.fft_size
            )));
        }
        let (lo, hi) = self.segment_len_range_ms;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::Configuration(format!(
                "segment length range ({lo}, {hi}) must satisfy 0 < min < max"
            )));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Full conversion: pitch marking, framing, per-frame FFT, spectral warp,
/// IFFT and PSOLA resynthesis. Output length equals input length.
pub fn convert_voice(clip: &AudioClip, kind: &WarpKind, fft_size: usize) -> Result<AudioClip> {
    let marks = mark_pitch(clip)?;
    convert_with_marks(clip, &marks, kind, fft_size)
}

/// [`convert_voice`] with precomputed pitch marks.
///
/// Frames longer than `fft_size` are transformed at the next power of two.
pub fn convert_with_marks(
    clip: &AudioClip,
    marks: &PitchMarks,
    kind: &WarpKind,
    fft_size: usize,
) -> Result<AudioClip> {
    kind.validate()?;
    if !fft_size.is_power_of_two() || fft_size < MIN_FFT_SIZE {
        return arg_err(format!("fft size {fft_size} is not a power of two >= {MIN_FFT_SIZE}"));
    }
    let rate = clip.sample_rate_hz();
    let mut frames = segment_frames(clip, marks);
    let mut warpers: HashMap<usize, SpectralWarper> = HashMap::new();
    let mut buf: Vec<f64> = Vec::new();
    for frame in &mut frames {
        let n = fft_size.max(frame.len().next_power_of_two());
        let warper = match warpers.entry(n) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(SpectralWarper::new(*kind, n / 2 + 1)?)
            }
        };
        // zero-phase layout: the frame centre (its pitch mark) goes to index
        // 0 and the first half wraps to the end, so bin phases vary slowly
        // and interpolating between bins does not cancel
        let half = frame.len() / 2;
        buf.clear();
        buf.resize(n, 0.0);
        for (i, &x) in frame.samples.iter().enumerate() {
            buf[(i + n - half) % n] = x;
        }
        let spec = fft_frame(&buf, rate)?;
        let warped = ifft_frame(&warper.apply(&spec));
        for (i, x) in frame.samples.iter_mut().enumerate() {
            *x = warped[(i + n - half) % n];
        }
    }
    psola_resynthesize(&frames, marks, clip.len())
}

/// One independently converted stretch of a segmented conversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvertedSegment {
    pub start_sample: usize,
    pub end_sample: usize,
    pub kind: WarpKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedConversion {
    pub clip: AudioClip,
    pub segments: Vec<ConvertedSegment>,
}

fn split_points<R: rand::Rng>(
    clip: &AudioClip,
    range_ms: (f64, f64),
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = clip.len();
    let gaps = detect_silence_gaps(clip, GAP_FRAME_MS, GAP_THRESHOLD_DB, GAP_MIN_MS)?;
    let min_seg = clip.ms_to_samples(MIN_SEGMENT_MS);
    let candidates: Vec<usize> = gaps
        .iter()
        .map(|g| g.midpoint())
        .filter(|&c| c >= min_seg && c + min_seg <= n)
        .collect();
    if candidates.is_empty() {
        warn!("no usable silence gaps; converting the clip as one segment");
    }
    let mut bounds = vec![0];
    loop {
        let start = *bounds.last().unwrap();
        let target = start + clip.ms_to_samples(rng.gen_range(range_ms.0..=range_ms.1));
        let next = candidates
            .iter()
            .copied()
            .filter(|&c| c >= start + min_seg)
            .min_by_key(|&c| c.abs_diff(target));
        match next {
            Some(c) if target < n => bounds.push(c),
            _ => break,
        }
    }
    bounds.push(n);
    Ok(bounds)
}

/// Splits the clip at silence-gap midpoints into randomly sized segments and
/// converts each with its own freshly sampled warp. Segments are joined with
/// a short linear crossfade that keeps the total length unchanged.
pub fn convert_voice_segmented(
    clip: &AudioClip,
    config: &ConversionConfig,
) -> Result<SegmentedConversion> {
    config.validate()?;
    if !config.segment_randomization {
        return Err(Error::Configuration(
            "segmented conversion requested with segment_randomization disabled".into(),
        ));
    }
    let mut rng = config.rng();
    let band = config.band();
    let bounds = split_points(clip, config.segment_len_range_ms, &mut rng)?;
    let n = clip.len();
    let fade = clip.ms_to_samples(CROSSFADE_MS).max(1);

    let mut out = vec![0.0; n];
    let mut segments = Vec::with_capacity(bounds.len() - 1);
    for (i, pair) in bounds.windows(2).enumerate() {
        let (start, end) = (pair[0], pair[1]);
        let ext_end = (end + fade).min(n);
        let kind = sample_warp_params(&band, config.policy, &mut rng)?;
        let piece = convert_voice(&clip.slice(start, ext_end)?, &kind, config.fft_size)?;
        for (k, &v) in piece.samples().iter().enumerate() {
            let pos = start + k;
            if i > 0 && k < fade {
                let r = (k as f64 + 0.5) / fade as f64;
                out[pos] = out[pos] * (1.0 - r) + v * r;
            } else {
                out[pos] = v;
            }
        }
        segments.push(ConvertedSegment {
            start_sample: start,
            end_sample: end,
            kind,
        });
    }
    Ok(SegmentedConversion {
        clip: AudioClip::from_unclamped(out, clip.sample_rate_hz())?,
        segments,
    })
}
