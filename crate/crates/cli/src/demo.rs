use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use sanitizer_core::audio::AudioClip;
use sanitizer_core::praka::{aggregate, error_bound, simulate_reports, PrivacyParam};
use sanitizer_core::warp::{
    attack_reduce_residual, attack_reverse, convert_voice, spectral_log_distance, ParamGrid,
    WarpKind,
};
use sanitizer_core::{Error, Result};

/// Fraction of `num_users` used as the error tolerance of the reported bound.
pub const BOUND_TOLERANCE_FRACTION: f64 = 0.05;

/// How many simulated users hold each vocabulary word as sensitive.
#[derive(Debug, Clone, PartialEq)]
pub enum SensitivityModel {
    /// One count per vocabulary word, in order.
    Counts(Vec<u64>),
    /// The same fraction of users for every word, rounded down.
    Fraction(f64),
}

impl SensitivityModel {
    pub fn counts(&self, vocabulary_len: usize, num_users: u64) -> Result<Vec<u64>> {
        match self {
            SensitivityModel::Counts(c) if c.len() == vocabulary_len => Ok(c.clone()),
            SensitivityModel::Counts(c) => Err(Error::Configuration(format!(
                "{} sensitive counts for {vocabulary_len} vocabulary words",
                c.len()
            ))),
            SensitivityModel::Fraction(f) if (0.0..=1.0).contains(f) => {
                Ok(vec![(f * num_users as f64).floor() as u64; vocabulary_len])
            }
            SensitivityModel::Fraction(f) => Err(Error::Argument(format!(
                "sensitive fraction {f} outside [0, 1]"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedWord {
    pub word: String,
    #[serde(rename = "N")]
    pub total: u64,
    #[serde(rename = "n")]
    pub ones: u64,
    pub n_hat: f64,
    pub true_count: u64,
    pub epsilon: f64,
    /// Tolerance used for `error_bound`.
    pub tolerance: f64,
    /// Exact probability that `|n_hat - true_count| <= tolerance`.
    pub error_bound: f64,
}

/// Every user reports every word once; the server aggregates.
pub fn praka_simulate(
    vocabulary: &[String],
    model: &SensitivityModel,
    num_users: u64,
    p: f64,
    seed: u64,
) -> Result<Vec<SimulatedWord>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Argument(format!("p must lie in (0, 1), got {p}")));
    }
    let p = PrivacyParam::new(p)?;
    let counts = model.counts(vocabulary.len(), num_users)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reports = simulate_reports(vocabulary, &counts, num_users, p, &mut rng)?;
    let tolerance = BOUND_TOLERANCE_FRACTION * num_users as f64;
    aggregate(&reports, p)?
        .into_iter()
        .map(|e| {
            let idx = vocabulary
                .iter()
                .position(|w| *w == e.word)
                .expect("aggregated words come from the vocabulary");
            let true_count = counts[idx];
            Ok(SimulatedWord {
                error_bound: error_bound(e.total, true_count, p, tolerance)?,
                word: e.word,
                total: e.total,
                ones: e.ones,
                n_hat: e.n_hat,
                true_count,
                epsilon: e.epsilon,
                tolerance,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseReport {
    pub alpha: f64,
    /// Spectral log distance, original vs converted.
    pub converted_distance: f64,
    /// Spectral log distance, original vs reversed.
    pub reversed_distance: f64,
    /// `reversed_distance / converted_distance`; below 0.5 means the attack
    /// undid at least half of the disguise.
    pub recovery_ratio: f64,
}

/// Convert `clip` with a fixed bilinear factor, then attack it with the
/// inverse factor.
pub fn attack_reverse_demo(clip: &AudioClip, alpha: f64, fft_size: usize) -> Result<ReverseReport> {
    let converted = convert_voice(clip, &WarpKind::bilinear(alpha)?, fft_size)?;
    let reversed = attack_reverse(&converted, alpha, fft_size)?;
    let converted_distance = spectral_log_distance(clip, &converted)?;
    let reversed_distance = spectral_log_distance(clip, &reversed)?;
    Ok(ReverseReport {
        alpha,
        converted_distance,
        reversed_distance,
        recovery_ratio: reversed_distance / converted_distance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceEntry {
    pub kind: WarpKind,
    pub residual: f64,
    pub best_param: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceReport {
    pub grid: ParamGrid,
    pub entries: Vec<ReduceEntry>,
}

/// Best single-bilinear fit for each warp kind. Bilinear kinds fit almost
/// exactly; compound kinds leave a large residual.
pub fn attack_reduce_demo(kinds: &[WarpKind], grid: &ParamGrid) -> Result<ReduceReport> {
    let entries = kinds
        .iter()
        .map(|k| {
            let fit = attack_reduce_residual(k, grid)?;
            Ok(ReduceEntry {
                kind: *k,
                residual: fit.residual,
                best_param: fit.best_param,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ReduceReport {
        grid: *grid,
        entries,
    })
}
