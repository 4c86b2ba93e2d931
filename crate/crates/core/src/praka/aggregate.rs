use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::report::{epsilon, KeywordReport, PrivacyParam};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCounter {
    /// Reports received for the word.
    pub total: u64,
    /// Reports with the first bit set.
    pub ones: u64,
}

impl WordCounter {
    pub fn merge(&mut self, other: WordCounter) {
        self.total += other.total;
        self.ones += other.ones;
    }
}

/// Per-word counters. Partial counts from shards merge by addition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AggregateCounts {
    counters: BTreeMap<String, WordCounter>,
}

impl AggregateCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, report: &KeywordReport) {
        let c = self.counters.entry(report.word.clone()).or_default();
        c.total += 1;
        c.ones += u64::from(report.b1);
    }

    pub fn merge(&mut self, other: &AggregateCounts) {
        for (w, c) in &other.counters {
            self.counters.entry(w.clone()).or_default().merge(*c);
        }
    }

    pub fn get(&self, word: &str) -> Option<WordCounter> {
        self.counters.get(word).copied()
    }

    /// Estimates in word order. The estimate is not clamped to `[0, N]`.
    pub fn estimates(&self, p: PrivacyParam) -> Result<Vec<AggregateEstimate>> {
        let pv = p.get();
        if pv >= 1.0 {
            return Err(Error::EstimatorUndefined);
        }
        let eps = epsilon(p);
        Ok(self
            .counters
            .iter()
            .map(|(word, c)| AggregateEstimate {
                word: word.clone(),
                total: c.total,
                ones: c.ones,
                n_hat: (c.ones as f64 - pv / 2.0 * c.total as f64) / (1.0 - pv),
                epsilon: eps,
            })
            .collect())
    }
}

impl<'a> FromIterator<&'a KeywordReport> for AggregateCounts {
    fn from_iter<I: IntoIterator<Item = &'a KeywordReport>>(iter: I) -> Self {
        let mut counts = Self::new();
        iter.into_iter().for_each(|r| counts.add(r));
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateEstimate {
    pub word: String,
    #[serde(rename = "N")]
    pub total: u64,
    #[serde(rename = "n")]
    pub ones: u64,
    pub n_hat: f64,
    pub epsilon: f64,
}

/// Count and estimate every word in `reports`.
pub fn aggregate(reports: &[KeywordReport], p: PrivacyParam) -> Result<Vec<AggregateEstimate>> {
    reports.iter().collect::<AggregateCounts>().estimates(p)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Binomial, Distribution};

    use super::*;
    use crate::praka::make_report;

    fn pp(p: f64) -> PrivacyParam {
        PrivacyParam::new(p).unwrap()
    }

    fn reports(word: &str, total: usize, ones: usize) -> Vec<KeywordReport> {
        (0..total)
            .map(|i| KeywordReport {
                word: word.into(),
                b1: i < ones,
                b2: i >= ones,
            })
            .collect()
    }

    #[test]
    fn hand_computed_estimate() {
        let est = aggregate(&reports("w", 1000, 400), pp(0.5)).unwrap();
        assert_eq!((est[0].total, est[0].ones), (1000, 400));
        assert!((est[0].n_hat - 300.0).abs() < 1e-9);
        assert!((est[0].epsilon - 2.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noiseless_limit_and_no_clamping() {
        let est = aggregate(&reports("w", 100, 37), pp(1e-12)).unwrap();
        assert!((est[0].n_hat - 37.0).abs() < 1e-6);
        let est = aggregate(&reports("w", 100, 0), pp(0.5)).unwrap();
        assert!(est[0].n_hat < 0.0);
    }

    #[test]
    fn p_one_is_undefined() {
        assert!(matches!(
            aggregate(&reports("w", 10, 5), pp(1.0)),
            Err(Error::EstimatorUndefined)
        ));
    }

    #[test]
    fn shards_merge() {
        let mut all = reports("a", 50, 20);
        all.extend(reports("b", 30, 3));
        let whole: AggregateCounts = all.iter().collect();
        let mut left: AggregateCounts = all[..40].iter().collect();
        let right: AggregateCounts = all[40..].iter().collect();
        left.merge(&right);
        assert_eq!(left, whole);
        assert_eq!(whole.get("b"), Some(WordCounter { total: 30, ones: 3 }));
    }

    #[test]
    fn unbiased_monte_carlo() {
        // count of first bits drawn directly as the sum of two binomials
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n_total, n0, trials) = (1000u64, 300u64, 10_000);
        for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let x = Binomial::new(n_total - n0, p / 2.0).unwrap();
            let y = Binomial::new(n0, 1.0 - p / 2.0).unwrap();
            let est: Vec<f64> = (0..trials)
                .map(|_| {
                    let n = x.sample(&mut rng) + y.sample(&mut rng);
                    (n as f64 - p / 2.0 * n_total as f64) / (1.0 - p)
                })
                .collect();
            let mean = est.iter().sum::<f64>() / trials as f64;
            let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            let se = (var / trials as f64).sqrt();
            assert!((mean - n0 as f64).abs() < 3.0 * se, "p={p}: {mean} ± {se}");
        }
    }

    #[test]
    fn end_to_end_reports() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut all = Vec::new();
        for i in 0..2000 {
            all.push(make_report("w", i < 600, pp(0.3), &mut rng));
        }
        let est = aggregate(&all, pp(0.3)).unwrap();
        // standard deviation of the estimate is about 20 here
        assert!((est[0].n_hat - 600.0).abs() < 80.0, "{}", est[0].n_hat);
    }

    #[test]
    fn output_keys() {
        let est = aggregate(&reports("w", 4, 2), pp(0.5)).unwrap();
        let v = serde_json::to_value(&est[0]).unwrap();
        for k in ["word", "N", "n", "n_hat", "epsilon"] {
            assert!(v.get(k).is_some(), "{k}");
        }
    }
}
