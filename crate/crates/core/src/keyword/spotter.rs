use serde::{Deserialize, Serialize};

use super::dtw::{Acc, ShiftedRows};
use super::template::{KeywordTemplate, HOP_MS, WINDOW_MS};
use crate::audio::{stft, AudioClip, FeatureMatrix};
use crate::error::{arg_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpotterConfig {
    /// A span is reported when its normalized DTW distance is below this.
    pub theta: f64,
    /// Shortest matched span as a fraction of the template length.
    pub min_stretch: f64,
    /// Longest matched span as a fraction of the template length.
    pub max_stretch: f64,
}

impl Default for SpotterConfig {
    fn default() -> Self {
        Self {
            theta: 0.025,
            min_stretch: 0.7,
            max_stretch: 1.4,
        }
    }
}

impl SpotterConfig {
    pub fn with_theta(theta: f64) -> Self {
        Self {
            theta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::Configuration(format!(
                "spotting threshold must be positive, got {}",
                self.theta
            )));
        }
        if !(self.min_stretch > 0.0 && self.min_stretch <= 1.0 && self.max_stretch >= 1.0) {
            return Err(Error::Configuration(format!(
                "need 0 < min_stretch <= 1 <= max_stretch, got {} / {}",
                self.min_stretch, self.max_stretch
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub keyword_id: u32,
    pub label: String,
    pub start_s: f64,
    pub end_s: f64,
    pub distance: f64,
    /// First feature row of the match.
    pub start_row: usize,
    /// Last feature row of the match, inclusive.
    pub end_row: usize,
}

impl Detection {
    pub fn overlaps(&self, other: &Detection) -> bool {
        self.start_row <= other.end_row && other.start_row <= self.end_row
    }
}

/// Compute features with the template framing (25 ms / 10 ms) and spot.
pub fn spot_in_clip(
    clip: &AudioClip,
    templates: &[KeywordTemplate],
    config: &SpotterConfig,
) -> Result<(FeatureMatrix, Vec<Detection>)> {
    let features = stft(clip, WINDOW_MS, HOP_MS)?;
    let found = spot_keywords(&features, templates, config)?;
    Ok((features, found))
}

/// Subsequence DTW of each template against the utterance features.
///
/// For every start row the best end row within the allowed stretch is kept.
/// Candidates under the threshold are then accepted greedily from the
/// smallest distance, dropping any that overlap an accepted one. The result
/// is sorted by start time.
pub fn spot_keywords(
    features: &FeatureMatrix,
    templates: &[KeywordTemplate],
    config: &SpotterConfig,
) -> Result<Vec<Detection>> {
    config.validate()?;
    let stream = ShiftedRows::new(features);
    let mut candidates = Vec::new();
    for t in templates {
        if t.x.dim() != features.dim() {
            return arg_err(format!(
                "template '{}' has dimension {}, features have {}",
                t.label,
                t.x.dim(),
                features.dim()
            ));
        }
        for (s, e, d) in scan(&ShiftedRows::new(&t.x), &stream, config) {
            if d < config.theta {
                candidates.push((d, s, e, t));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let hop_s = features.hop_ms() / 1000.0;
    let win_s = features.window_ms() / 1000.0;
    let mut accepted: Vec<Detection> = Vec::new();
    for (d, s, e, t) in candidates {
        let det = Detection {
            keyword_id: t.keyword_id,
            label: t.label.clone(),
            start_s: s as f64 * hop_s,
            end_s: e as f64 * hop_s + win_s,
            distance: d,
            start_row: s,
            end_row: e,
        };
        if accepted.iter().all(|a| !a.overlaps(&det)) {
            accepted.push(det);
        }
    }
    accepted.sort_by_key(|d| d.start_row);
    Ok(accepted)
}

/// Best `(start, end, distance)` for every start row that admits a span.
fn scan(template: &ShiftedRows, stream: &ShiftedRows, config: &SpotterConfig) -> Vec<(usize, usize, f64)> {
    let l = template.len();
    let t = stream.len();
    let min_len = ((config.min_stretch * l as f64).floor() as usize).max(1);
    let max_len = ((config.max_stretch * l as f64).ceil() as usize).max(min_len);
    if t < min_len {
        return Vec::new();
    }
    // cost[j * l + i]: template row i against stream row j
    let mut cost = vec![0.0; l * t];
    for j in 0..t {
        for i in 0..l {
            cost[j * l + i] = template.cost(i, stream, j);
        }
    }
    let mut out = Vec::with_capacity(t - min_len + 1);
    let mut prev = vec![Acc::INF; l];
    let mut curr = vec![Acc::INF; l];
    for s in 0..=t - min_len {
        let mut best: Option<(usize, f64)> = None;
        for j in s..t.min(s + max_len) {
            let c = &cost[j * l..(j + 1) * l];
            if j == s {
                curr[0] = Acc { cost: c[0], len: 1 };
                for i in 1..l {
                    curr[i] = curr[i - 1].step(c[i]);
                }
            } else {
                curr[0] = prev[0].step(c[0]);
                for i in 1..l {
                    let mut b = prev[i - 1];
                    if curr[i - 1].better_than(b) {
                        b = curr[i - 1];
                    }
                    if prev[i].better_than(b) {
                        b = prev[i];
                    }
                    curr[i] = b.step(c[i]);
                }
            }
            if j + 1 - s >= min_len {
                let d = curr[l - 1].normalized();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            std::mem::swap(&mut prev, &mut curr);
        }
        if let Some((e, d)) = best {
            out.push((s, e, d));
        }
    }
    out
}
