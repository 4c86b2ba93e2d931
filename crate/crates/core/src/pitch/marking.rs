use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::error::{arg_err, Result};

pub const F0_MIN_HZ: f64 = 60.0;
pub const F0_MAX_HZ: f64 = 400.0;

const ANALYSIS_MS: f64 = 40.0;
const HOP_MS: f64 = 10.0;
const MIN_CLIP_MS: f64 = 50.0;
const VOICING_THRESHOLD: f64 = 0.3;
/// Frames quieter than this RMS (about -70 dBFS) are never voiced.
const SILENCE_RMS: f64 = 3.2e-4;
/// Accept the shortest lag whose peak reaches this fraction of the best peak;
/// suppresses octave-down errors.
const OCTAVE_RATIO: f64 = 0.9;
/// Voiced marks are searched within this fraction of the period around the
/// predicted position.
const SEARCH_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchMark {
    pub position: usize,
    /// Local fundamental in Hz, `0.0` for unvoiced marks.
    pub f0_hz: f64,
}

impl PitchMark {
    pub fn is_voiced(&self) -> bool {
        self.f0_hz > 0.0
    }
}

/// Strictly increasing pitch marks of one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchMarks {
    marks: Vec<PitchMark>,
    sample_rate_hz: u32,
    clip_len: usize,
}

impl PitchMarks {
    pub fn new(marks: Vec<PitchMark>, sample_rate_hz: u32, clip_len: usize) -> Result<Self> {
        if marks.windows(2).any(|w| w[0].position >= w[1].position) {
            return arg_err("pitch marks must be strictly increasing");
        }
        if marks.last().is_some_and(|m| m.position >= clip_len) {
            return arg_err("pitch mark beyond the end of the clip");
        }
        if marks
            .iter()
            .any(|m| m.is_voiced() && !(F0_MIN_HZ..=F0_MAX_HZ).contains(&m.f0_hz))
        {
            return arg_err("voiced mark with f0 outside [60, 400] Hz");
        }
        if marks.iter().any(|m| m.f0_hz < 0.0 || !m.f0_hz.is_finite()) {
            return arg_err("negative or non-finite f0");
        }
        Ok(Self {
            marks,
            sample_rate_hz,
            clip_len,
        })
    }

    pub fn marks(&self) -> &[PitchMark] {
        &self.marks
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn positions(&self) -> Vec<usize> {
        self.marks.iter().map(|m| m.position).collect()
    }

    pub fn voiced(&self) -> Vec<bool> {
        self.marks.iter().map(PitchMark::is_voiced).collect()
    }

    pub fn f0_track(&self) -> Vec<f64> {
        self.marks.iter().map(|m| m.f0_hz).collect()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn clip_len(&self) -> usize {
        self.clip_len
    }
}

/// Per-hop F0 estimates (0 = unvoiced).
struct F0Track {
    values: Vec<f64>,
    hop: usize,
}

impl F0Track {
    fn at(&self, sample: usize) -> f64 {
        let k = (sample / self.hop).min(self.values.len() - 1);
        self.values[k]
    }
}

fn estimate_f0(frame: &[f64], rate: f64) -> f64 {
    let n = frame.len();
    let energy: f64 = frame.iter().map(|x| x * x).sum();
    if (energy / n as f64).sqrt() < SILENCE_RMS {
        return 0.0;
    }
    let min_lag = (rate / F0_MAX_HZ).floor() as usize;
    let max_lag = ((rate / F0_MIN_HZ).ceil() as usize).min(n / 2);
    if min_lag < 2 || max_lag <= min_lag + 1 {
        return 0.0;
    }

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for x in frame {
        prefix.push(prefix.last().unwrap() + x * x);
    }
    // r[τ - (min_lag - 1)] for τ in [min_lag - 1, max_lag + 1]
    let lo = min_lag - 1;
    let hi = (max_lag + 1).min(n - 1);
    let corr: Vec<f64> = (lo..=hi)
        .map(|lag| {
            let dot: f64 = frame[..n - lag]
                .iter()
                .zip(&frame[lag..])
                .map(|(a, b)| a * b)
                .sum();
            let e1 = prefix[n - lag];
            let e2 = prefix[n] - prefix[lag];
            let denom = (e1 * e2).sqrt();
            if denom > 0.0 {
                dot / denom
            } else {
                0.0
            }
        })
        .collect();

    let peaks: Vec<usize> = (1..corr.len() - 1)
        .filter(|&i| {
            let lag = lo + i;
            lag >= min_lag && lag <= max_lag && corr[i] >= corr[i - 1] && corr[i] > corr[i + 1]
        })
        .collect();
    let best = peaks.iter().map(|&i| corr[i]).fold(f64::MIN, f64::max);
    if best < VOICING_THRESHOLD {
        return 0.0;
    }
    let Some(&i) = peaks.iter().find(|&&i| corr[i] >= OCTAVE_RATIO * best) else {
        return 0.0;
    };
    // parabolic refinement of the peak lag
    let (a, b, c) = (corr[i - 1], corr[i], corr[i + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 1e-12 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let lag = (lo + i) as f64 + shift;
    (rate / lag).clamp(F0_MIN_HZ, F0_MAX_HZ)
}

fn track_f0(samples: &[f64], rate: u32) -> F0Track {
    let n = samples.len();
    let win = ((ANALYSIS_MS * rate as f64 / 1000.0).round() as usize).min(n);
    let hop = (HOP_MS * rate as f64 / 1000.0).round() as usize;
    let frames = n.div_ceil(hop);
    let values = (0..frames)
        .map(|k| {
            let center = k * hop + hop / 2;
            let start = center.saturating_sub(win / 2).min(n - win);
            estimate_f0(&samples[start..start + win], rate as f64)
        })
        .collect();
    F0Track { values, hop }
}

fn argmax_in(samples: &[f64], lo: usize, hi: usize) -> usize {
    (lo..=hi)
        .max_by(|&a, &b| samples[a].total_cmp(&samples[b]).then(b.cmp(&a)))
        .unwrap_or(lo)
}

/// Places pitch marks on `clip`; see the module docs for the method.
pub fn mark_pitch(clip: &AudioClip) -> Result<PitchMarks> {
    let rate = clip.sample_rate_hz();
    let samples = clip.samples();
    let n = samples.len();
    if (n as f64) < MIN_CLIP_MS * rate as f64 / 1000.0 {
        return arg_err(format!(
            "clip of {n} samples is shorter than {MIN_CLIP_MS} ms"
        ));
    }
    let track = track_f0(samples, rate);
    let unvoiced_step = track.hop;

    let mut marks: Vec<PitchMark> = Vec::new();
    loop {
        let last = marks.last().copied();
        let candidate = match last {
            None => 0,
            Some(m) if m.is_voiced() => m.position + (rate as f64 / m.f0_hz).round() as usize,
            Some(m) => m.position + unvoiced_step,
        };
        if candidate >= n {
            break;
        }
        let f0 = track.at(candidate);
        if f0 == 0.0 {
            marks.push(PitchMark {
                position: candidate,
                f0_hz: 0.0,
            });
            continue;
        }
        let period = rate as f64 / f0;
        let (lo, hi) = match last {
            Some(m) if m.is_voiced() => {
                let tol = SEARCH_TOLERANCE * period;
                (
                    (candidate as f64 - tol).round() as usize,
                    (candidate as f64 + tol).round() as usize,
                )
            }
            _ => (candidate, candidate + period.round() as usize - 1),
        };
        let lo = lo.max(last.map_or(0, |m| m.position + 1));
        let hi = hi.min(n - 1);
        if lo > hi {
            break;
        }
        let position = argmax_in(samples, lo, hi);
        let local = track.at(position);
        marks.push(PitchMark {
            position,
            f0_hz: if local > 0.0 { local } else { f0 },
        });
    }
    PitchMarks::new(marks, rate, n)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    const RATE: u32 = 16000;

    fn clip(f: impl Fn(f64) -> f64, secs: f64) -> AudioClip {
        let n = (secs * RATE as f64) as usize;
        AudioClip::new((0..n).map(|t| f(t as f64 / RATE as f64)).collect(), RATE).unwrap()
    }

    fn sawtooth(f0: f64) -> impl Fn(f64) -> f64 {
        move |t| 0.8 * (2.0 * ((t * f0).fract()) - 1.0)
    }

    fn voiced_spacings(marks: &PitchMarks) -> Vec<i64> {
        marks
            .marks()
            .windows(2)
            .filter(|w| w[0].is_voiced() && w[1].is_voiced())
            .map(|w| w[1].position as i64 - w[0].position as i64)
            .collect()
    }

    #[test]
    fn sawtooth_100hz_spacing() {
        let marks = mark_pitch(&clip(sawtooth(100.0), 0.5)).unwrap();
        let sp = voiced_spacings(&marks);
        assert!(sp.len() > 40);
        assert!(sp.iter().all(|&d| (d - 160).abs() <= 5), "{sp:?}");
        for m in marks.marks().iter().filter(|m| m.is_voiced()) {
            assert!((m.f0_hz - 100.0).abs() < 2.0, "{}", m.f0_hz);
        }
    }

    #[test]
    fn sine_200hz_spacing() {
        let marks = mark_pitch(&clip(|t| 0.5 * (2.0 * PI * 200.0 * t).sin(), 0.5)).unwrap();
        let sp = voiced_spacings(&marks);
        assert!(sp.len() > 80);
        assert!(sp.iter().all(|&d| (d - 80).abs() <= 5), "{sp:?}");
    }

    #[test]
    fn white_noise_is_unvoiced_every_10ms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise: Vec<f64> = (0..8000).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let marks = mark_pitch(&AudioClip::new(noise, RATE).unwrap()).unwrap();
        assert!(marks.voiced().iter().all(|v| !v));
        assert!(marks.f0_track().iter().all(|&f| f == 0.0));
        assert!(marks
            .positions()
            .windows(2)
            .all(|w| w[1] - w[0] == 160));
        assert_eq!(marks.len(), 50);
    }

    #[test]
    fn silence_is_unvoiced() {
        let marks = mark_pitch(&AudioClip::silence(1600, RATE).unwrap()).unwrap();
        assert!(marks.marks().iter().all(|m| !m.is_voiced()));
    }

    #[test]
    fn chirp_spacing_decreases() {
        // 100 -> 200 Hz over 0.3 s, about 1.8 samples of period change per cycle
        let dur = 0.3;
        let f = move |t: f64| {
            let phase = 2.0 * PI * (100.0 * t + 0.5 * (100.0 / dur) * t * t);
            0.5 * phase.sin()
        };
        let marks = mark_pitch(&clip(f, dur)).unwrap();
        let sp = voiced_spacings(&marks);
        assert!(sp.len() > 30);
        assert!(sp.windows(2).all(|w| w[1] <= w[0]), "{sp:?}");
        assert!(sp.last().unwrap() + 50 < sp[0]);
    }

    #[test]
    fn voiced_then_unvoiced_transitions() {
        let mut s: Vec<f64> = (0..4800)
            .map(|t| sawtooth(120.0)(t as f64 / RATE as f64))
            .collect();
        s.extend(vec![0.0; 4800]);
        let marks = mark_pitch(&AudioClip::new(s, RATE).unwrap()).unwrap();
        let m = marks.marks();
        assert!(m.iter().take(10).all(|m| m.is_voiced()));
        assert!(m.iter().rev().take(10).all(|m| !m.is_voiced()));
        assert!(m.iter().all(|m| m.position < 9600));
    }

    #[test]
    fn too_short_clip_is_rejected() {
        assert!(mark_pitch(&AudioClip::silence(799, RATE).unwrap()).is_err());
        assert!(mark_pitch(&AudioClip::silence(800, RATE).unwrap()).is_ok());
    }

    #[test]
    fn invalid_marks_rejected() {
        let m = |p, f| PitchMark {
            position: p,
            f0_hz: f,
        };
        assert!(PitchMarks::new(vec![m(5, 0.0), m(5, 0.0)], RATE, 100).is_err());
        assert!(PitchMarks::new(vec![m(100, 0.0)], RATE, 100).is_err());
        assert!(PitchMarks::new(vec![m(10, 500.0)], RATE, 100).is_err());
        assert!(PitchMarks::new(vec![m(10, 100.0)], RATE, 100).is_ok());
    }
}
