use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};

/// Randomization level `p` in `(0, 1]`; larger is more private.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PrivacyParam(f64);

impl PrivacyParam {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p <= 1.0 {
            Ok(Self(p))
        } else {
            arg_err(format!("privacy parameter must lie in (0, 1], got {p}"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Probability that a bit ends up equal to its original value.
    pub fn keep_probability(self) -> f64 {
        1.0 - self.0 / 2.0
    }
}

impl TryFrom<f64> for PrivacyParam {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<PrivacyParam> for f64 {
    fn from(p: PrivacyParam) -> f64 {
        p.0
    }
}

/// Privacy loss of one report: `2 ln((2 - p) / p)`.
pub fn epsilon(p: PrivacyParam) -> f64 {
    let p = p.get();
    2.0 * ((2.0 - p) / p).ln()
}

/// Largest ratio, over the four outputs, between the output probabilities
/// under the two possible inputs. Differential privacy with parameter
/// [`epsilon`] requires this to be at most `exp(epsilon)`.
pub fn verify_dp(p: PrivacyParam) -> f64 {
    let keep = p.keep_probability();
    let flip = 1.0 - keep;
    let prob = |input: (bool, bool), output: (bool, bool)| {
        let bit = |b: bool, o: bool| if b == o { keep } else { flip };
        bit(input.0, output.0) * bit(input.1, output.1)
    };
    let (sensitive, other) = ((true, false), (false, true));
    let mut worst = 0.0f64;
    for output in [(false, false), (false, true), (true, false), (true, true)] {
        let (a, b) = (prob(sensitive, output), prob(other, output));
        worst = worst.max(a / b).max(b / a);
    }
    worst
}

/// A randomized two-bit report for one word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordReport {
    pub word: String,
    #[serde(with = "bit")]
    pub b1: bool,
    #[serde(with = "bit")]
    pub b2: bool,
}

mod bit {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(D::Error::custom(format!("bit must be 0 or 1, got {v}"))),
        }
    }
}

fn perturb<R: Rng + ?Sized>(bit: bool, p: f64, rng: &mut R) -> bool {
    let u: f64 = rng.gen();
    if u < p / 2.0 {
        true
    } else if u < p {
        false
    } else {
        bit
    }
}

/// Build a randomized report. Callers are responsible for reporting each
/// word only once; [`ReportingClient`] enforces that.
pub fn make_report<R: Rng + ?Sized>(
    word: &str,
    is_sensitive: bool,
    p: PrivacyParam,
    rng: &mut R,
) -> KeywordReport {
    KeywordReport {
        word: word.to_string(),
        b1: perturb(is_sensitive, p.get(), rng),
        b2: perturb(!is_sensitive, p.get(), rng),
    }
}

/// Client-side guard against reporting a word twice.
///
/// The set of reported words can be persisted as a JSON array so the rule
/// survives restarts.
#[derive(Debug, Clone)]
pub struct ReportingClient {
    p: PrivacyParam,
    reported: BTreeSet<String>,
    state_path: Option<PathBuf>,
}

impl ReportingClient {
    pub fn in_memory(p: PrivacyParam) -> Self {
        Self {
            p,
            reported: BTreeSet::new(),
            state_path: None,
        }
    }

    /// Load the reported-word set from `path` if it exists.
    pub fn open(p: PrivacyParam, path: &Path) -> Result<Self> {
        let reported = if path.exists() {
            serde_json::from_str(&fs::read_to_string(path)?)?
        } else {
            BTreeSet::new()
        };
        Ok(Self {
            p,
            reported,
            state_path: Some(path.to_path_buf()),
        })
    }

    pub fn has_reported(&self, word: &str) -> bool {
        self.reported.contains(word)
    }

    pub fn report<R: Rng + ?Sized>(
        &mut self,
        word: &str,
        is_sensitive: bool,
        rng: &mut R,
    ) -> Result<KeywordReport> {
        if self.reported.contains(word) {
            return Err(Error::Protocol(format!("word '{word}' was already reported")));
        }
        self.reported.insert(word.to_string());
        if let Some(path) = &self.state_path {
            fs::write(path, serde_json::to_string(&self.reported)?)?;
        }
        Ok(make_report(word, is_sensitive, self.p, rng))
    }
}

/// Reports from `num_users` simulated users over the whole vocabulary.
/// Word `w` is sensitive for the first `sensitive_counts[w]` users.
pub fn simulate_reports<R: Rng + ?Sized>(
    vocabulary: &[String],
    sensitive_counts: &[u64],
    num_users: u64,
    p: PrivacyParam,
    rng: &mut R,
) -> Result<Vec<KeywordReport>> {
    if vocabulary.len() != sensitive_counts.len() {
        return arg_err("need one sensitive count per vocabulary word");
    }
    if let Some(c) = sensitive_counts.iter().find(|&&c| c > num_users) {
        return arg_err(format!("sensitive count {c} exceeds {num_users} users"));
    }
    let mut out = Vec::with_capacity(vocabulary.len() * num_users as usize);
    for user in 0..num_users {
        let mut client = ReportingClient::in_memory(p);
        for (word, &count) in vocabulary.iter().zip(sensitive_counts) {
            out.push(client.report(word, user < count, rng)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn pp(p: f64) -> PrivacyParam {
        PrivacyParam::new(p).unwrap()
    }

    #[test]
    fn parameter_bounds() {
        assert!(PrivacyParam::new(0.0).is_err());
        assert!(PrivacyParam::new(-0.1).is_err());
        assert!(PrivacyParam::new(1.1).is_err());
        assert!(PrivacyParam::new(f64::NAN).is_err());
        assert!(PrivacyParam::new(1.0).is_ok());
        assert!(serde_json::from_str::<PrivacyParam>("0").is_err());
        assert_eq!(serde_json::from_str::<PrivacyParam>("0.25").unwrap(), pp(0.25));
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon(pp(1.0)), 0.0);
        assert!((epsilon(pp(0.5)) - 2.0 * 3f64.ln()).abs() < 1e-12);
        assert!((epsilon(pp(2.0 / 3.0)) - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn dp_ratio_is_tight() {
        assert!((verify_dp(pp(0.5)) - 9.0).abs() < 1e-12);
        assert!((verify_dp(pp(1.0)) - 1.0).abs() < 1e-12);
        for i in 1..10 {
            let p = pp(i as f64 / 10.0);
            let bound = ((2.0 - p.get()) / p.get()).powi(2);
            assert!((verify_dp(p) - bound).abs() <= 1e-12 * bound);
            assert!(epsilon(p).exp() >= verify_dp(p) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn bit_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let trials = 100_000;
        let (mut b1, mut b2) = (0, 0);
        for _ in 0..trials {
            let r = make_report("w", true, pp(0.5), &mut rng);
            b1 += usize::from(r.b1);
            b2 += usize::from(r.b2);
        }
        assert!((b1 as f64 / trials as f64 - 0.75).abs() < 0.01);
        assert!((b2 as f64 / trials as f64 - 0.25).abs() < 0.01);
    }

    #[test]
    fn limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let r = make_report("w", true, pp(1e-12), &mut rng);
            assert!(r.b1 && !r.b2);
        }
        // at p = 1 the input has no influence
        let ones = (0..20_000)
            .filter(|_| make_report("w", false, pp(1.0), &mut rng).b1)
            .count();
        assert!((ones as f64 / 20_000.0 - 0.5).abs() < 0.015);
    }

    #[test]
    fn duplicate_report_is_a_protocol_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut c = ReportingClient::in_memory(pp(0.5));
        c.report("alpha", true, &mut rng).unwrap();
        assert!(matches!(c.report("alpha", false, &mut rng), Err(Error::Protocol(_))));
        assert!(c.report("beta", false, &mut rng).is_ok());
    }

    #[test]
    fn reported_set_persists() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reported.json");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut c = ReportingClient::open(pp(0.5), &path).unwrap();
        c.report("alpha", true, &mut rng).unwrap();
        let mut again = ReportingClient::open(pp(0.5), &path).unwrap();
        assert!(again.has_reported("alpha"));
        assert!(matches!(again.report("alpha", true, &mut rng), Err(Error::Protocol(_))));
    }

    #[test]
    fn report_wire_format() {
        let r = KeywordReport { word: "x".into(), b1: true, b2: false };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"word":"x","b1":1,"b2":0}"#);
        assert!(serde_json::from_str::<KeywordReport>(r#"{"word":"x","b1":2,"b2":0}"#).is_err());
    }

    #[test]
    fn simulation_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vocab = vec!["a".to_string(), "b".to_string()];
        let r = simulate_reports(&vocab, &[3, 0], 5, pp(1e-9), &mut rng).unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r.iter().filter(|x| x.word == "a" && x.b1).count(), 3);
        assert!(simulate_reports(&vocab, &[6, 0], 5, pp(0.5), &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn epsilon_decreasing(a in 0.001f64..1.0, b in 0.001f64..1.0) {
            prop_assume!(a < b);
            prop_assert!(epsilon(pp(a)) > epsilon(pp(b)));
            prop_assert!(epsilon(pp(b)) >= 0.0);
        }
    }
}
