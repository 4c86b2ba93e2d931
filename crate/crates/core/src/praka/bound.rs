use super::report::PrivacyParam;
use crate::error::{arg_err, Error, Result};

/// Probabilities further than this many standard deviations from the mean
/// are below 1e-30 and are dropped.
const TAIL_SIGMAS: f64 = 12.0;
/// Slack when rounding the summation bounds, so values that are integers
/// up to rounding are not lost.
const BOUND_SLACK: f64 = 1e-9;

/// Distribution of the number of reports with the first bit set.
#[derive(Debug, Clone, PartialEq)]
pub struct CountPmf {
    /// Smallest count with stored probability.
    pub offset: u64,
    pub probs: Vec<f64>,
}

impl CountPmf {
    pub fn prob(&self, k: u64) -> f64 {
        k.checked_sub(self.offset)
            .and_then(|i| self.probs.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability of the count lying in `[lo, hi]`.
    pub fn range(&self, lo: u64, hi: u64) -> f64 {
        if lo > hi {
            return 0.0;
        }
        (lo.max(self.offset)..=hi)
            .map_while(|k| self.probs.get((k - self.offset) as usize))
            .sum()
    }
}

/// Binomial PMF over the support that carries non-negligible mass.
///
/// Log probabilities are built outward from the mode with the ratio
/// `P(k+1)/P(k) = (n-k)/(k+1) * q/(1-q)` and normalized by log-sum-exp.
/// Closed-form log binomial coefficients lose about 1e-8 of relative
/// accuracy at n = 10^6; the recurrence does not.
fn binomial_pmf(n: u64, q: f64) -> CountPmf {
    if q <= 0.0 || n == 0 {
        return CountPmf { offset: 0, probs: vec![1.0] };
    }
    if q >= 1.0 {
        return CountPmf { offset: n, probs: vec![1.0] };
    }
    let mean = n as f64 * q;
    let half = TAIL_SIGMAS * (mean * (1.0 - q)).sqrt() + 10.0;
    let lo = (mean - half).floor().max(0.0) as u64;
    let hi = ((mean + half).ceil() as u64).min(n);
    let mode = (((n + 1) as f64 * q).floor() as u64).clamp(lo, hi);
    let odds = (q / (1.0 - q)).ln();
    let mut logs = vec![0.0; (hi - lo + 1) as usize];
    let at = |k: u64| (k - lo) as usize;
    for k in mode..hi {
        logs[at(k + 1)] = logs[at(k)] + ((n - k) as f64 / (k + 1) as f64).ln() + odds;
    }
    for k in (lo + 1..=mode).rev() {
        logs[at(k - 1)] = logs[at(k)] - ((n - k + 1) as f64 / k as f64).ln() - odds;
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    let probs = logs.iter().map(|l| (l - norm).exp()).collect();
    CountPmf { offset: lo, probs }
}

/// Exact PMF of the first-bit count `n = X + Y` when `n0` of `total` users
/// are sensitive: `X ~ Bin(total - n0, p/2)` and `Y ~ Bin(n0, 1 - p/2)`.
pub fn count_pmf(total: u64, n0: u64, p: PrivacyParam) -> Result<CountPmf> {
    if n0 > total {
        return arg_err(format!("true count {n0} exceeds {total} reports"));
    }
    let q = p.get() / 2.0;
    let x = binomial_pmf(total - n0, q);
    let y = binomial_pmf(n0, 1.0 - q);
    let mut probs = vec![0.0; x.probs.len() + y.probs.len() - 1];
    for (i, a) in x.probs.iter().enumerate() {
        for (j, b) in y.probs.iter().enumerate() {
            probs[i + j] += a * b;
        }
    }
    Ok(CountPmf {
        offset: x.offset + y.offset,
        probs,
    })
}

/// `Pr(|n_hat - n0| <= eps)` computed exactly from [`count_pmf`].
pub fn error_bound(total: u64, n0: u64, p: PrivacyParam, eps: f64) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return arg_err(format!("error tolerance must be finite and nonnegative, got {eps}"));
    }
    let pv = p.get();
    if pv >= 1.0 {
        return Err(Error::EstimatorUndefined);
    }
    let pmf = count_pmf(total, n0, p)?;
    let shift = pv / 2.0 * total as f64;
    let lo = ((1.0 - pv) * (n0 as f64 - eps) + shift - BOUND_SLACK).ceil().max(0.0);
    let hi = ((1.0 - pv) * (n0 as f64 + eps) + shift + BOUND_SLACK)
        .floor()
        .min(total as f64);
    if lo > hi {
        return Ok(0.0);
    }
    Ok(pmf.range(lo as u64, hi as u64).clamp(0.0, 1.0))
}
