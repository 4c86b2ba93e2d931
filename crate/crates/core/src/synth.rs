//! Deterministic synthetic signals: tones, formant vowels and pseudo-words.
//!
//! These drive the test suites, the benchmark and the CLI demos; nothing in
//! the sanitization pipeline depends on them.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{fft_frame, hann_window, AudioClip};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Formant {
    pub freq_hz: f64,
    pub bandwidth_hz: f64,
}

const fn formant(freq_hz: f64, bandwidth_hz: f64) -> Formant {
    Formant {
        freq_hz,
        bandwidth_hz,
    }
}

pub const VOWEL_A: [Formant; 3] = [formant(730.0, 90.0), formant(1090.0, 110.0), formant(2440.0, 170.0)];
pub const VOWEL_I: [Formant; 3] = [formant(270.0, 60.0), formant(2290.0, 100.0), formant(3010.0, 170.0)];
pub const VOWEL_U: [Formant; 3] = [formant(300.0, 60.0), formant(870.0, 90.0), formant(2240.0, 170.0)];

/// Resonance envelope with a gentle high-frequency tilt.
pub fn formant_gain(freq_hz: f64, formants: &[Formant]) -> f64 {
    let resonances: f64 = formants
        .iter()
        .map(|f| {
            let x = (freq_hz - f.freq_hz) / (0.5 * f.bandwidth_hz);
            1.0 / (1.0 + x * x).sqrt()
        })
        .sum();
    let tilt = 1.0 / (1.0 + freq_hz / 1000.0);
    (resonances + 0.01) * tilt
}

fn to_clip(mut samples: Vec<f64>, rate: u32, peak: f64) -> AudioClip {
    normalize_peak(&mut samples, peak);
    AudioClip::from_unclamped(samples, rate).expect("synthetic clip")
}

pub fn normalize_peak(samples: &mut [f64], peak: f64) {
    let max = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if max > 0.0 {
        let g = peak / max;
        samples.iter_mut().for_each(|s| *s *= g);
    }
}

fn num_samples(secs: f64, rate: u32) -> usize {
    (secs * rate as f64).round() as usize
}

pub fn sine(freq_hz: f64, secs: f64, rate: u32, amplitude: f64) -> AudioClip {
    let s = (0..num_samples(secs, rate))
        .map(|t| amplitude * (2.0 * PI * freq_hz * t as f64 / rate as f64).sin())
        .collect();
    AudioClip::from_unclamped(s, rate).expect("synthetic clip")
}

/// Rising sawtooth in `[-amplitude, amplitude)`.
pub fn sawtooth(freq_hz: f64, secs: f64, rate: u32, amplitude: f64) -> AudioClip {
    let s = (0..num_samples(secs, rate))
        .map(|t| amplitude * (2.0 * (t as f64 * freq_hz / rate as f64).fract() - 1.0))
        .collect();
    AudioClip::from_unclamped(s, rate).expect("synthetic clip")
}

/// Linear frequency sweep.
pub fn chirp(f_start: f64, f_end: f64, secs: f64, rate: u32, amplitude: f64) -> AudioClip {
    let k = (f_end - f_start) / secs;
    let s = (0..num_samples(secs, rate))
        .map(|i| {
            let t = i as f64 / rate as f64;
            amplitude * (2.0 * PI * (f_start * t + 0.5 * k * t * t)).sin()
        })
        .collect();
    AudioClip::from_unclamped(s, rate).expect("synthetic clip")
}

pub fn white_noise<R: Rng + ?Sized>(secs: f64, rate: u32, amplitude: f64, rng: &mut R) -> AudioClip {
    let s = (0..num_samples(secs, rate))
        .map(|_| rng.gen_range(-amplitude..amplitude))
        .collect();
    AudioClip::from_unclamped(s, rate).expect("synthetic clip")
}

/// Harmonics of `f0_hz` shaped by `formants`, without onset ramps.
fn voiced_samples(f0_hz: f64, n: usize, rate: u32, formants: &[Formant]) -> Vec<f64> {
    let nyquist = rate as f64 / 2.0;
    let harmonics: Vec<(f64, f64)> = (1..)
        .map(|h| h as f64 * f0_hz)
        .take_while(|&f| f < 0.9 * nyquist)
        .map(|f| (2.0 * PI * f / rate as f64, formant_gain(f, formants)))
        .collect();
    (0..n)
        .map(|t| {
            harmonics
                .iter()
                .map(|&(w, g)| g * (w * t as f64).cos())
                .sum()
        })
        .collect()
}

/// Noise with the `formants` envelope, built from random-phase sinusoids on
/// a 20 Hz grid.
fn shaped_noise<R: Rng + ?Sized>(n: usize, rate: u32, formants: &[Formant], rng: &mut R) -> Vec<f64> {
    let nyquist = rate as f64 / 2.0;
    let partials: Vec<(f64, f64, f64)> = (5..)
        .map(|i| i as f64 * 20.0)
        .take_while(|&f| f < 0.95 * nyquist)
        .map(|f| {
            (
                2.0 * PI * f / rate as f64,
                formant_gain(f, formants),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    (0..n)
        .map(|t| {
            partials
                .iter()
                .map(|&(w, g, ph)| g * (w * t as f64 + ph).cos())
                .sum()
        })
        .collect()
}

fn apply_ramps(samples: &mut [f64], ramp: usize) {
    let n = samples.len();
    let ramp = ramp.min(n / 2);
    for i in 0..ramp {
        let g = 0.5 - 0.5 * (PI * (i as f64 + 0.5) / ramp as f64).cos();
        samples[i] *= g;
        samples[n - 1 - i] *= g;
    }
}

/// Sustained vowel at `f0_hz`, peak-normalized to 0.5.
pub fn vowel(f0_hz: f64, secs: f64, rate: u32, formants: &[Formant]) -> AudioClip {
    to_clip(voiced_samples(f0_hz, num_samples(secs, rate), rate, formants), rate, 0.5)
}

/// Power-weighted mean frequency over 512-sample Hann frames (hop 256).
pub fn spectral_centroid_hz(clip: &AudioClip) -> f64 {
    let n = 512;
    let window = hann_window(n);
    let s = clip.samples();
    let (mut num, mut den) = (0.0, 0.0);
    let mut start = 0;
    while start + n <= s.len() {
        let frame: Vec<f64> = s[start..start + n].iter().zip(&window).map(|(x, w)| x * w).collect();
        let spec = fft_frame(&frame, clip.sample_rate_hz()).expect("power-of-two frame");
        for (k, c) in spec.bins().iter().enumerate() {
            let p = c.norm_sqr();
            num += spec.bin_frequency_hz(k) * p;
            den += p;
        }
        start += n / 2;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// One steady segment of a pseudo-word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phone {
    pub formants: [Formant; 3],
    /// Fundamental in Hz; `0.0` renders shaped noise instead of harmonics.
    pub f0_hz: f64,
    pub duration_ms: f64,
}

/// A sequence of phones standing in for a spoken word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoWord {
    pub phones: Vec<Phone>,
}

impl PseudoWord {
    /// Three to five phones, mostly voiced, 70 to 150 ms each.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let count = rng.gen_range(3..=5);
        let f0 = rng.gen_range(100.0..180.0);
        let phones = (0..count)
            .map(|_| {
                let voiced = rng.gen_bool(0.8);
                let formants = if voiced {
                    [
                        formant(rng.gen_range(280.0..900.0), 80.0),
                        formant(rng.gen_range(900.0..2500.0), 120.0),
                        formant(rng.gen_range(2300.0..3400.0), 180.0),
                    ]
                } else {
                    [
                        formant(rng.gen_range(2500.0..4000.0), 600.0),
                        formant(rng.gen_range(4000.0..5500.0), 800.0),
                        formant(rng.gen_range(5500.0..7000.0), 900.0),
                    ]
                };
                Phone {
                    formants,
                    f0_hz: if voiced { f0 * rng.gen_range(0.9..1.1) } else { 0.0 },
                    duration_ms: rng.gen_range(70.0..150.0),
                }
            })
            .collect();
        Self { phones }
    }

    pub fn duration_ms(&self) -> f64 {
        self.phones.iter().map(|p| p.duration_ms).sum()
    }

    /// Renders the word with every phone stretched by `time_scale`; noise
    /// phases are drawn from `rng`. Peak amplitude is 0.5.
    ///
    /// Adjacent voiced phones are coarticulated: formants and f0 glide
    /// linearly between phone midpoints with continuous phase. Short ramps
    /// are applied only where voicing changes and at the word edges.
    pub fn render<R: Rng + ?Sized>(&self, time_scale: f64, rate: u32, rng: &mut R) -> Vec<f64> {
        let lens: Vec<usize> = self
            .phones
            .iter()
            .map(|p| num_samples(p.duration_ms * time_scale / 1000.0, rate))
            .collect();
        let ramp = (0.005 * rate as f64) as usize;
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.phones.len() {
            let voiced = self.phones[i].f0_hz > 0.0;
            let mut j = i + 1;
            while j < self.phones.len() && (self.phones[j].f0_hz > 0.0) == voiced {
                j += 1;
            }
            let mut seg = if voiced {
                glide_samples(&self.phones[i..j], &lens[i..j], rate)
            } else {
                let mut seg = Vec::new();
                for (p, &n) in self.phones[i..j].iter().zip(&lens[i..j]) {
                    seg.extend(shaped_noise(n, rate, &p.formants, rng));
                }
                seg
            };
            normalize_peak(&mut seg, if voiced { 1.0 } else { 0.4 });
            apply_ramps(&mut seg, ramp);
            out.extend(seg);
            i = j;
        }
        normalize_peak(&mut out, 0.5);
        out
    }
}

/// Neutral vocal tract that voiced runs glide out of and back into.
const NEUTRAL: [Formant; 3] = [formant(500.0, 100.0), formant(1500.0, 130.0), formant(2500.0, 180.0)];

/// Voiced run with formant targets at each phone's midpoint, starting and
/// ending at a neutral tract, with linear interpolation in between. The
/// fundamental follows the phone values and falls 10% over the run.
fn glide_samples(phones: &[Phone], lens: &[usize], rate: u32) -> Vec<f64> {
    const BLOCK: usize = 32;
    let total: usize = lens.iter().sum();
    let mut anchors: Vec<(f64, [Formant; 3], f64)> = Vec::with_capacity(phones.len() + 2);
    anchors.push((0.0, NEUTRAL, phones[0].f0_hz));
    let mut start = 0;
    for (p, &n) in phones.iter().zip(lens) {
        anchors.push((start as f64 + n as f64 / 2.0, p.formants, p.f0_hz));
        start += n;
    }
    anchors.push((total as f64, NEUTRAL, phones[phones.len() - 1].f0_hz));
    let at = |t: f64| -> ([Formant; 3], f64) {
        let k = anchors
            .iter()
            .position(|a| a.0 > t)
            .unwrap_or(anchors.len() - 1)
            .max(1);
        let ((t0, fa, pa), (t1, fb, pb)) = (anchors[k - 1], anchors[k]);
        let r = if t1 > t0 { ((t - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 1.0 };
        let lerp = |x: f64, y: f64| x + r * (y - x);
        let mut f = fa;
        for (fi, (a, b)) in f.iter_mut().zip(fa.iter().zip(&fb)) {
            fi.freq_hz = lerp(a.freq_hz, b.freq_hz);
            fi.bandwidth_hz = lerp(a.bandwidth_hz, b.bandwidth_hz);
        }
        let declination = 1.0 - 0.1 * t / total.max(1) as f64;
        (f, lerp(pa, pb) * declination)
    };
    let nyquist = rate as f64 / 2.0;
    let mut out = Vec::with_capacity(total);
    let mut phase = 0.0;
    let mut gains = Vec::new();
    for block_start in (0..total).step_by(BLOCK) {
        let (formants, f0) = at(block_start as f64 + BLOCK as f64 / 2.0);
        gains.clear();
        gains.extend(
            (1..)
                .map(|h| h as f64 * f0)
                .take_while(|&f| f < 0.9 * nyquist)
                .map(|f| formant_gain(f, &formants)),
        );
        let step = 2.0 * PI * f0 / rate as f64;
        for _ in block_start..(block_start + BLOCK).min(total) {
            out.push(
                gains
                    .iter()
                    .enumerate()
                    .map(|(h, g)| g * ((h + 1) as f64 * phase).cos())
                    .sum(),
            );
            phase = (phase + step) % (2.0 * PI);
        }
    }
    out
}

/// Mean power of a sample slice.
pub fn power(samples: &[f64]) -> f64 {
    samples.iter().map(|s| s * s).sum::<f64>() / samples.len().max(1) as f64
}

/// Adds uniform white noise whose power is `reference_power / 10^(snr_db/10)`.
pub fn add_noise<R: Rng + ?Sized>(samples: &mut [f64], reference_power: f64, snr_db: f64, rng: &mut R) {
    let noise_power = reference_power / 10f64.powf(snr_db / 10.0);
    // uniform on [-a, a] has power a²/3
    let a = (3.0 * noise_power).sqrt();
    if a > 0.0 {
        for s in samples {
            *s += rng.gen_range(-a..a);
        }
    }
}

/// Where a keyword instance sits inside a generated utterance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedKeyword {
    pub keyword: usize,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone)]
pub struct CorpusUtterance {
    pub clip: AudioClip,
    pub planted: Vec<PlantedKeyword>,
}

#[derive(Debug, Clone)]
pub struct KeywordCorpus {
    pub keywords: Vec<PseudoWord>,
    /// One noisy rendering of each keyword at its nominal tempo.
    pub enrollment: Vec<AudioClip>,
    pub utterances: Vec<CorpusUtterance>,
}

/// Shape of a generated spotting corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub num_keywords: usize,
    pub num_distractors: usize,
    pub num_utterances: usize,
    pub words_per_utterance: usize,
    /// Chance that each word slot holds a keyword rather than a distractor.
    pub keyword_probability: f64,
    /// Instances are stretched by a factor drawn from `1 ± time_warp`.
    pub time_warp: f64,
    pub snr_db: f64,
    pub sample_rate_hz: u32,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            num_keywords: 5,
            num_distractors: 20,
            num_utterances: 40,
            words_per_utterance: 6,
            keyword_probability: 0.3,
            time_warp: 0.1,
            snr_db: 20.0,
            sample_rate_hz: 16000,
        }
    }
}

/// Pseudo-word utterances with planted keywords.
///
/// Words are separated by 80 to 250 ms pauses with 200 ms of lead-in and
/// tail. Noise is added over the whole utterance relative to the mean power
/// of the spoken words.
pub fn build_keyword_corpus<R: Rng + ?Sized>(spec: &CorpusSpec, rng: &mut R) -> KeywordCorpus {
    let rate = spec.sample_rate_hz;
    let keywords: Vec<PseudoWord> = (0..spec.num_keywords).map(|_| PseudoWord::random(rng)).collect();
    let distractors: Vec<PseudoWord> = (0..spec.num_distractors).map(|_| PseudoWord::random(rng)).collect();
    let enrollment = keywords
        .iter()
        .map(|k| {
            let mut s = k.render(1.0, rate, rng);
            let p = power(&s);
            add_noise(&mut s, p, spec.snr_db, rng);
            AudioClip::from_unclamped(s, rate).expect("valid synthetic clip")
        })
        .collect();
    let pause = |rng: &mut R, lo: f64, hi: f64| vec![0.0; num_samples(rng.gen_range(lo..hi) / 1000.0, rate)];
    let utterances = (0..spec.num_utterances)
        .map(|_| {
            let mut out = vec![0.0; num_samples(0.2, rate)];
            let mut planted = Vec::new();
            let mut speech_energy = 0.0;
            let mut speech_len = 0;
            for w in 0..spec.words_per_utterance {
                if w > 0 {
                    out.extend(pause(rng, 80.0, 250.0));
                }
                let scale = 1.0 + rng.gen_range(-spec.time_warp..=spec.time_warp);
                let (word, keyword) = if rng.gen_bool(spec.keyword_probability) {
                    let k = rng.gen_range(0..keywords.len());
                    (&keywords[k], Some(k))
                } else {
                    (&distractors[rng.gen_range(0..distractors.len())], None)
                };
                let s = word.render(scale, rate, rng);
                if let Some(k) = keyword {
                    planted.push(PlantedKeyword {
                        keyword: k,
                        start_s: out.len() as f64 / rate as f64,
                        end_s: (out.len() + s.len()) as f64 / rate as f64,
                    });
                }
                speech_energy += power(&s) * s.len() as f64;
                speech_len += s.len();
                out.extend(s);
            }
            out.extend(vec![0.0; num_samples(0.2, rate)]);
            add_noise(&mut out, speech_energy / speech_len.max(1) as f64, spec.snr_db, rng);
            CorpusUtterance {
                clip: AudioClip::from_unclamped(out, rate).expect("valid synthetic clip"),
                planted,
            }
        })
        .collect();
    KeywordCorpus {
        keywords,
        enrollment,
        utterances,
    }
}
