//! Sensitive-keyword spotting and reversible safeword substitution.
//!
//! Keywords are enrolled from one recording as STFT feature templates and
//! matched against utterances by subsequence DTW under cosine distance.
//! Confirmed hits fold back into the template as a running mean, so the
//! template drifts towards how the word is actually spoken in context.
//! Detected spans are overwritten with safeword audio and logged, and the
//! log lets the returned transcript be mapped back.

mod dtw;
mod files;
mod restore;
mod spotter;
mod substitute;
mod template;

pub use dtw::{dtw_distance, local_cost, DtwAlignment};
pub use files::{
    load_keyword_config, load_safeword_bank, read_substitution_log, write_substitution_log,
    KeywordEntry, SafewordEntry,
};
pub use restore::{restore_transcript, Restored};
pub use spotter::{spot_in_clip, spot_keywords, Detection, SpotterConfig};
pub use substitute::{
    substitute_keywords, Category, Safeword, SafewordBank, SubstitutionRecord, CROSSFADE_MS,
};
pub use template::{
    enroll_keyword, update_template, KeywordTemplate, TemplateStore, MAX_ENROLL_S, MIN_ENROLL_S,
};
