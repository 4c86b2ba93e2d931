use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::audio::{stft, AudioClip, FeatureMatrix};
use crate::error::{arg_err, Result};

pub const MIN_ENROLL_S: f64 = 0.2;
pub const MAX_ENROLL_S: f64 = 2.0;
pub(crate) const WINDOW_MS: f64 = 25.0;
pub(crate) const HOP_MS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordTemplate {
    pub keyword_id: u32,
    pub label: String,
    pub x: FeatureMatrix,
    /// Confirmed hits folded into `x` since enrollment.
    pub hit_count: u32,
}

/// Extract a template from a single-word recording of 0.2 to 2.0 seconds.
pub fn enroll_keyword(keyword_id: u32, label: &str, clip: &AudioClip) -> Result<KeywordTemplate> {
    let d = clip.duration_s();
    if !(MIN_ENROLL_S..=MAX_ENROLL_S).contains(&d) {
        return arg_err(format!(
            "enrollment clip for '{label}' is {d:.3} s, need {MIN_ENROLL_S} to {MAX_ENROLL_S} s"
        ));
    }
    if label.trim().is_empty() {
        return arg_err("keyword label must not be empty");
    }
    Ok(KeywordTemplate {
        keyword_id,
        label: label.to_string(),
        x: stft(clip, WINDOW_MS, HOP_MS)?,
        hit_count: 0,
    })
}

/// Fold a confirmed detection into the template.
///
/// Each template row becomes a weighted mean of itself and the average of
/// the detected rows the alignment `path` pairs with it. With `i` the hit
/// count after this update, the old template keeps weight `i / (i + 1)`.
pub fn update_template(
    template: &KeywordTemplate,
    detected: &FeatureMatrix,
    path: &[(usize, usize)],
) -> Result<KeywordTemplate> {
    let x = &template.x;
    if x.dim() != detected.dim() {
        return arg_err(format!(
            "feature dimension mismatch: template {} vs detection {}",
            x.dim(),
            detected.dim()
        ));
    }
    let rows = x.num_rows();
    let dim = x.dim();
    let mut sums = vec![0.0; rows * dim];
    let mut counts = vec![0usize; rows];
    for &(k, j) in path {
        if k >= rows || j >= detected.num_rows() {
            return arg_err(format!("alignment pair ({k}, {j}) out of range"));
        }
        for (s, v) in sums[k * dim..(k + 1) * dim].iter_mut().zip(detected.row(j)) {
            *s += v;
        }
        counts[k] += 1;
    }
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return arg_err(format!("alignment leaves template row {k} unmatched"));
    }
    let i = f64::from(template.hit_count + 1);
    let (keep, add) = (i / (i + 1.0), 1.0 / (i + 1.0));
    let mut updated = x.clone();
    for k in 0..rows {
        let c = counts[k] as f64;
        for (t, s) in updated.row_mut(k).iter_mut().zip(&sums[k * dim..(k + 1) * dim]) {
            *t = keep * *t + add * s / c;
        }
    }
    Ok(KeywordTemplate {
        x: updated,
        hit_count: template.hit_count + 1,
        ..template.clone()
    })
}

/// Templates keyed by label. Re-enrolling a label keeps its id and resets
/// its hit count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TemplateStore {
    templates: BTreeMap<String, KeywordTemplate>,
    next_id: u32,
}

impl TemplateStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn enroll(&mut self, label: &str, clip: &AudioClip) -> Result<&KeywordTemplate> {
        let id = match self.templates.get(label) {
            Some(t) => t.keyword_id,
            None => {
                self.next_id += 1;
                self.next_id - 1
            }
        };
        let t = enroll_keyword(id, label, clip)?;
        self.templates.insert(label.to_string(), t);
        Ok(&self.templates[label])
    }

    pub fn get(&self, label: &str) -> Option<&KeywordTemplate> {
        self.templates.get(label)
    }

    pub fn templates(&self) -> impl Iterator<Item = &KeywordTemplate> {
        self.templates.values()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Apply [`update_template`] to the stored template for `label`.
    pub fn confirm_hit(
        &mut self,
        label: &str,
        detected: &FeatureMatrix,
        path: &[(usize, usize)],
    ) -> Result<&KeywordTemplate> {
        let Some(current) = self.templates.get(label) else {
            return arg_err(format!("no template enrolled for '{label}'"));
        };
        let updated = update_template(current, detected, path)?;
        self.templates.insert(label.to_string(), updated);
        Ok(&self.templates[label])
    }
}
