use serde::{Deserialize, Serialize};

use super::clip::ms_to_samples;
use super::AudioClip;
use crate::error::{arg_err, Result};

/// Half-open span `[start_sample, end_sample)` of low-energy audio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SilenceGap {
    pub start_sample: usize,
    pub end_sample: usize,
}

impl SilenceGap {
    pub fn len(&self) -> usize {
        self.end_sample - self.start_sample
    }

    pub fn is_empty(&self) -> bool {
        self.end_sample <= self.start_sample
    }

    pub fn midpoint(&self) -> usize {
        (self.start_sample + self.end_sample) / 2
    }
}

/// Splits the clip into consecutive frames of `frame_ms` and returns every
/// maximal run of frames whose RMS level (dB re full scale) is below
/// `energy_threshold_db`, keeping runs at least `min_gap_ms` long.
///
/// The final frame may be partial. Gaps come back sorted and disjoint.
pub fn detect_silence_gaps(
    clip: &AudioClip,
    frame_ms: f64,
    energy_threshold_db: f64,
    min_gap_ms: f64,
) -> Result<Vec<SilenceGap>> {
    if !(frame_ms > 0.0) || min_gap_ms < 0.0 {
        return arg_err("frame_ms must be positive and min_gap_ms nonnegative");
    }
    let frame = ms_to_samples(frame_ms, clip.sample_rate_hz()).max(1);
    let min_gap = ms_to_samples(min_gap_ms, clip.sample_rate_hz());
    let samples = clip.samples();

    let mut gaps = Vec::new();
    let mut run_start: Option<usize> = None;
    let push_run = |start: usize, end: usize, gaps: &mut Vec<SilenceGap>| {
        if end - start >= min_gap.max(1) {
            gaps.push(SilenceGap {
                start_sample: start,
                end_sample: end,
            });
        }
    };
    for (idx, chunk) in samples.chunks(frame).enumerate() {
        let energy = chunk.iter().map(|s| s * s).sum::<f64>() / chunk.len() as f64;
        let level_db = 10.0 * energy.log10();
        let start = idx * frame;
        if level_db < energy_threshold_db {
            run_start.get_or_insert(start);
        } else if let Some(rs) = run_start.take() {
            push_run(rs, start, &mut gaps);
        }
    }
    if let Some(rs) = run_start {
        push_run(rs, samples.len(), &mut gaps);
    }
    Ok(gaps)
}
