use regex::RegexBuilder;

use super::substitute::SubstitutionRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restored {
    pub text: String,
    /// Safewords that could not be found after the previous replacement.
    pub warnings: Vec<String>,
}

/// Map safewords in a transcript back to the keywords they replaced.
///
/// Records are applied in `order_index` order. Each one replaces the first
/// whole-word, case-insensitive occurrence of its safeword after the
/// previous replacement, so repeated safewords resolve left to right.
/// A record whose safeword is missing is reported and skipped.
pub fn restore_transcript(transcript: &str, records: &[SubstitutionRecord]) -> Result<Restored> {
    let mut ordered: Vec<&SubstitutionRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.order_index);
    let mut text = transcript.to_string();
    let mut warnings = Vec::new();
    let mut cursor = 0;
    for r in ordered {
        let re = RegexBuilder::new(&format!(r"\b{}\b", regex::escape(&r.safeword)))
            .case_insensitive(true)
            .build()
            .map_err(|e| Error::Argument(format!("bad safeword '{}': {e}", r.safeword)))?;
        match re.find_at(&text, cursor).map(|m| m.range()) {
            Some(range) => {
                cursor = range.start + r.keyword.len();
                text.replace_range(range, &r.keyword);
            }
            None => warnings.push(format!(
                "safeword '{}' (record {} of utterance '{}') not found in transcript",
                r.safeword, r.order_index, r.utterance_id
            )),
        }
    }
    Ok(Restored { text, warnings })
}
