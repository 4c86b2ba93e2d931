use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::spotter::Detection;
use crate::audio::AudioClip;
use crate::error::{arg_err, Error, Result};

/// Length of the linear blend at each edge of a replaced span.
pub const CROSSFADE_MS: f64 = 10.0;

/// Word class shared by a keyword and the safewords that may replace it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    SingularNoun,
    PluralNoun,
    ProperNoun,
    Verb,
    Adjective,
    Number,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Safeword {
    pub word: String,
    pub audio: AudioClip,
}

/// Safeword recordings grouped by category. Every bucket is nonempty.
#[derive(Debug, Clone, Default)]
pub struct SafewordBank {
    buckets: BTreeMap<Category, Vec<Safeword>>,
}

impl SafewordBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, category: Category, word: &str, audio: AudioClip) -> Result<()> {
        if word.trim().is_empty() || word.chars().any(char::is_whitespace) {
            return arg_err(format!("safeword '{word}' must be a single nonempty token"));
        }
        self.buckets.entry(category).or_default().push(Safeword {
            word: word.to_string(),
            audio,
        });
        Ok(())
    }

    pub fn bucket(&self, category: Category) -> &[Safeword] {
        self.buckets.get(&category).map_or(&[], Vec::as_slice)
    }

    pub fn categories(&self) -> impl Iterator<Item = Category> + '_ {
        self.buckets.keys().copied()
    }

    pub fn pick<R: Rng + ?Sized>(&self, category: Category, rng: &mut R) -> Result<&Safeword> {
        let bucket = self.bucket(category);
        if bucket.is_empty() {
            return Err(Error::Configuration(format!(
                "no safewords available for category {category:?}"
            )));
        }
        Ok(&bucket[rng.gen_range(0..bucket.len())])
    }
}

/// One replacement, enough to undo it in the returned transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionRecord {
    pub utterance_id: String,
    pub order_index: usize,
    pub keyword: String,
    pub safeword: String,
    pub start_s: f64,
    pub end_s: f64,
}

/// Replace every detected span with a random safeword of the keyword's
/// category.
///
/// The safeword is blended into the first and last 10 ms of the span, so
/// the output length is the input length minus the spans plus the inserted
/// safewords. Safewords recorded at another rate are resampled linearly.
/// Records are numbered in time order.
pub fn substitute_keywords<R: Rng + ?Sized>(
    clip: &AudioClip,
    detections: &[Detection],
    categories: &HashMap<String, Category>,
    bank: &SafewordBank,
    utterance_id: &str,
    rng: &mut R,
) -> Result<(AudioClip, Vec<SubstitutionRecord>)> {
    let mut order: Vec<&Detection> = detections.iter().collect();
    order.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    for w in order.windows(2) {
        if w[1].start_s < w[0].end_s {
            return arg_err(format!(
                "detections '{}' and '{}' overlap",
                w[0].label, w[1].label
            ));
        }
    }
    let rate = clip.sample_rate_hz();
    let src = clip.samples();
    let to_sample = |t: f64| ((t * rate as f64).round().max(0.0) as usize).min(src.len());
    let xf_max = clip.ms_to_samples(CROSSFADE_MS);

    // choose safewords and spans first so the output is allocated once at
    // its exact length
    let mut splices = Vec::with_capacity(order.len());
    let mut out_len = src.len();
    let mut cursor = 0;
    for det in order {
        let Some(&category) = categories.get(&det.label) else {
            return Err(Error::Configuration(format!(
                "keyword '{}' has no category",
                det.label
            )));
        };
        let safeword = bank.pick(category, rng)?;
        let insert = resample(safeword.audio.samples(), safeword.audio.sample_rate_hz(), rate);
        let (start, end) = (to_sample(det.start_s).max(cursor), to_sample(det.end_s));
        if end <= start {
            return arg_err(format!("detection '{}' covers no samples", det.label));
        }
        out_len = out_len - (end - start) + insert.len();
        splices.push((det, safeword, insert, start, end));
        cursor = end;
    }

    let mut out = Vec::with_capacity(out_len);
    let mut records = Vec::with_capacity(splices.len());
    let mut cursor = 0;
    for (order_index, (det, safeword, insert, start, end)) in splices.into_iter().enumerate() {
        out.extend_from_slice(&src[cursor..start]);
        let span = &src[start..end];
        let xf = xf_max.min(span.len() / 2).min(insert.len() / 2);
        let tail = insert.len() - xf;
        for (k, &v) in insert.iter().enumerate() {
            let blended = if k < xf {
                let r = (k as f64 + 0.5) / xf as f64;
                r * v + (1.0 - r) * span[k]
            } else if k >= tail {
                let r = (k - tail) as f64 + 0.5;
                let r = r / xf as f64;
                (1.0 - r) * v + r * span[span.len() - xf + (k - tail)]
            } else {
                v
            };
            out.push(blended);
        }
        records.push(SubstitutionRecord {
            utterance_id: utterance_id.to_string(),
            order_index,
            keyword: det.label.clone(),
            safeword: safeword.word.clone(),
            start_s: det.start_s,
            end_s: det.end_s,
        });
        cursor = end;
    }
    out.extend_from_slice(&src[cursor..]);
    debug_assert_eq!(out.len(), out_len);
    Ok((AudioClip::from_unclamped(out, rate)?, records))
}

/// Linear-interpolation resampling.
fn resample(samples: &[f64], from_hz: u32, to_hz: u32) -> Vec<f64> {
    if from_hz == to_hz || samples.len() < 2 {
        return samples.to_vec();
    }
    let ratio = f64::from(from_hz) / f64::from(to_hz);
    let n = ((samples.len() as f64) / ratio).round().max(1.0) as usize;
    (0..n)
        .map(|k| {
            let pos = k as f64 * ratio;
            let i = (pos.floor() as usize).min(samples.len() - 2);
            let frac = (pos - i as f64).min(1.0);
            samples[i] * (1.0 - frac) + samples[i + 1] * frac
        })
        .collect()
}
