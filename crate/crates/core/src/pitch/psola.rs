use super::marking::PitchMarks;
use crate::audio::{hann_window, AudioClip};
use crate::error::{arg_err, Result};

/// Lower bound applied to the squared-window envelope before normalizing.
pub const ENVELOPE_FLOOR: f64 = 1e-6;

const UNVOICED_HALF_MS: f64 = 10.0;

/// One Hann-weighted, mark-centred frame.
///
/// `samples[i]` corresponds to clip position `start + i`; positions outside
/// the clip are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisFrame {
    pub center_mark_index: usize,
    pub start: isize,
    pub samples: Vec<f64>,
}

impl AnalysisFrame {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The Hann window this frame was weighted with.
    pub fn window(&self) -> Vec<f64> {
        hann_window(self.samples.len())
    }

    pub fn end(&self) -> isize {
        self.start + self.samples.len() as isize
    }
}

fn half_length(f0_hz: f64, rate: u32) -> usize {
    if f0_hz > 0.0 {
        (rate as f64 / f0_hz).round() as usize
    } else {
        (UNVOICED_HALF_MS * rate as f64 / 1000.0).round() as usize
    }
}

/// Cuts one two-period (20 ms unvoiced) Hann frame per mark.
pub fn segment_frames(clip: &AudioClip, marks: &PitchMarks) -> Vec<AnalysisFrame> {
    let samples = clip.samples();
    let n = samples.len() as isize;
    marks
        .marks()
        .iter()
        .enumerate()
        .map(|(idx, mark)| {
            let half = half_length(mark.f0_hz, clip.sample_rate_hz());
            let len = 2 * half;
            let start = mark.position as isize - half as isize;
            let window = hann_window(len);
            let frame = window
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let pos = start + i as isize;
                    if (0..n).contains(&pos) {
                        samples[pos as usize] * w
                    } else {
                        0.0
                    }
                })
                .collect();
            AnalysisFrame {
                center_mark_index: idx,
                start,
                samples: frame,
            }
        })
        .collect()
}

/// Weighted overlap-add of `frames` at their source positions, normalized by
/// the accumulated squared Hann envelope (floored at [`ENVELOPE_FLOOR`]) and
/// clamped to `[-1, 1]`.
pub fn psola_resynthesize(
    frames: &[AnalysisFrame],
    marks: &PitchMarks,
    out_len: usize,
) -> Result<AudioClip> {
    if frames.len() != marks.len() {
        return arg_err(format!(
            "{} frames for {} pitch marks",
            frames.len(),
            marks.len()
        ));
    }
    if out_len != marks.clip_len() {
        return arg_err(format!(
            "output length {out_len} differs from source length {}",
            marks.clip_len()
        ));
    }
    let mut acc = vec![0.0; out_len];
    let mut envelope = vec![0.0; out_len];
    for frame in frames {
        let Some(mark) = marks.marks().get(frame.center_mark_index) else {
            return arg_err(format!("frame refers to missing mark {}", frame.center_mark_index));
        };
        let center = frame.start + frame.samples.len() as isize / 2;
        if frame.samples.len() % 2 != 0 || center != mark.position as isize {
            return arg_err(format!(
                "frame for mark {} is not centred on it",
                frame.center_mark_index
            ));
        }
        let window = frame.window();
        for (i, (x, w)) in frame.samples.iter().zip(&window).enumerate() {
            let pos = frame.start + i as isize;
            if pos < 0 || pos >= out_len as isize {
                continue;
            }
            let pos = pos as usize;
            acc[pos] += w * x;
            envelope[pos] += w * w;
        }
    }
    let out = acc
        .iter()
        .zip(&envelope)
        .map(|(a, e)| a / e.max(ENVELOPE_FLOOR))
        .collect();
    AudioClip::from_unclamped(out, marks.sample_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pitch::{mark_pitch, PitchMark};

    const RATE: u32 = 16000;

    fn sawtooth(f0: f64, n: usize) -> AudioClip {
        let s = (0..n)
            .map(|t| 0.8 * (2.0 * ((t as f64 / RATE as f64 * f0).fract()) - 1.0))
            .collect();
        AudioClip::new(s, RATE).unwrap()
    }

    fn interior_snr_db(reference: &[f64], test: &[f64], skip: usize) -> f64 {
        let r = &reference[skip..reference.len() - skip];
        let t = &test[skip..test.len() - skip];
        let signal: f64 = r.iter().map(|x| x * x).sum();
        let noise: f64 = r.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum();
        10.0 * (signal / noise.max(1e-300)).log10()
    }

    #[test]
    fn voiced_frame_spans_two_periods() {
        let clip = sawtooth(100.0, 1600);
        let marks = PitchMarks::new(
            vec![PitchMark {
                position: 800,
                f0_hz: 100.0,
            }],
            RATE,
            1600,
        )
        .unwrap();
        let frames = segment_frames(&clip, &marks);
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].start, 640);
        assert_eq!(frames[0].end(), 960);
    }

    #[test]
    fn unvoiced_frame_is_20ms() {
        let clip = AudioClip::silence(1600, RATE).unwrap();
        let marks = PitchMarks::new(
            vec![PitchMark {
                position: 500,
                f0_hz: 0.0,
            }],
            RATE,
            1600,
        )
        .unwrap();
        assert_eq!(segment_frames(&clip, &marks)[0].len(), 320);
    }

    #[test]
    fn edge_frames_are_zero_padded() {
        let clip = AudioClip::new(vec![0.5; 1000], RATE).unwrap();
        let marks = PitchMarks::new(
            vec![
                PitchMark {
                    position: 0,
                    f0_hz: 0.0,
                },
                PitchMark {
                    position: 999,
                    f0_hz: 0.0,
                },
            ],
            RATE,
            1000,
        )
        .unwrap();
        let frames = segment_frames(&clip, &marks);
        assert_eq!(frames[0].start, -160);
        assert!(frames[0].samples[..160].iter().all(|&s| s == 0.0));
        assert!(frames[1].samples[161..].iter().all(|&s| s == 0.0));
        assert!(frames.iter().all(|f| f.len() % 2 == 0));
    }

    #[test]
    fn identity_reconstruction_snr() {
        for f0 in [80.0, 150.0, 300.0] {
            let clip = sawtooth(f0, 8000);
            let marks = mark_pitch(&clip).unwrap();
            let frames = segment_frames(&clip, &marks);
            let out = psola_resynthesize(&frames, &marks, clip.len()).unwrap();
            assert_eq!(out.len(), clip.len());
            let snr = interior_snr_db(clip.samples(), out.samples(), 400);
            assert!(snr >= 20.0, "f0 {f0}: snr {snr}");
        }
    }

    #[test]
    fn zero_frames_give_zero_output() {
        let clip = sawtooth(150.0, 4000);
        let marks = mark_pitch(&clip).unwrap();
        let mut frames = segment_frames(&clip, &marks);
        for f in &mut frames {
            f.samples.iter_mut().for_each(|s| *s = 0.0);
        }
        let out = psola_resynthesize(&frames, &marks, clip.len()).unwrap();
        assert!(out.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn single_frame_normalized_by_own_window() {
        let clip = AudioClip::new(vec![0.3; 1600], RATE).unwrap();
        let marks = PitchMarks::new(
            vec![PitchMark {
                position: 800,
                f0_hz: 100.0,
            }],
            RATE,
            1600,
        )
        .unwrap();
        let frames = segment_frames(&clip, &marks);
        let out = psola_resynthesize(&frames, &marks, 1600).unwrap();
        let w = frames[0].window();
        for i in 0..320 {
            let expected = if w[i] * w[i] >= ENVELOPE_FLOOR { 0.3 } else { w[i] * w[i] * 0.3 / ENVELOPE_FLOOR };
            assert!((out.samples()[640 + i] - expected).abs() < 1e-12);
        }
        assert!(out.samples()[..640].iter().all(|&s| s == 0.0));
    }

    #[test]
    fn inconsistent_inputs_rejected() {
        let clip = sawtooth(150.0, 4000);
        let marks = mark_pitch(&clip).unwrap();
        let frames = segment_frames(&clip, &marks);
        assert!(psola_resynthesize(&frames[1..], &marks, 4000).is_err());
        assert!(psola_resynthesize(&frames, &marks, 3999).is_err());
        let mut shifted = frames.clone();
        shifted[0].start += 1;
        assert!(psola_resynthesize(&shifted, &marks, 4000).is_err());
    }
}
