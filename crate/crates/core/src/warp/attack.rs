use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{convert_voice, WarpKind, QUADRATURE_INTERVALS};
use crate::audio::{stft, AudioClip};
use crate::error::{arg_err, Result};

/// Reversing attack on a fixed-factor bilinear conversion: convert again
/// with `-alpha`.
pub fn attack_reverse(clip_converted: &AudioClip, alpha: f64, fft_size: usize) -> Result<AudioClip> {
    convert_voice(clip_converted, &WarpKind::bilinear(-alpha)?, fft_size)
}

/// Mean over STFT frames (25 ms / 10 ms) of the RMS difference of the two
/// log spectra, in dB.
pub fn spectral_log_distance(a: &AudioClip, b: &AudioClip) -> Result<f64> {
    if a.len() != b.len() || a.sample_rate_hz() != b.sample_rate_hz() {
        return arg_err("clips differ in length or sample rate");
    }
    let fa = stft(a, 25.0, 10.0)?;
    let fb = stft(b, 25.0, 10.0)?;
    let total: f64 = fa
        .rows()
        .zip(fb.rows())
        .map(|(x, y)| {
            let ms = x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>() / x.len() as f64;
            ms.sqrt()
        })
        .sum();
    Ok(total / fa.num_rows() as f64)
}

/// Single-parameter warp family an attacker composes with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarpFamily {
    Bilinear,
    Quadratic,
}

impl WarpFamily {
    fn member(self, c: f64) -> WarpKind {
        match self {
            WarpFamily::Bilinear => WarpKind::Bilinear { alpha: c },
            WarpFamily::Quadratic => WarpKind::Quadratic { beta: c },
        }
    }
}

/// Evenly spaced parameter values `lo, lo + step, ..., <= hi` of one family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub family: WarpFamily,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl ParamGrid {
    pub fn bilinear(lo: f64, hi: f64, step: f64) -> Self {
        Self {
            family: WarpFamily::Bilinear,
            lo,
            hi,
            step,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReduceFit {
    pub residual: f64,
    pub best_param: f64,
}

/// Best single-family approximation of `kind`: the minimum over the grid of
/// the L1 distance between the two warp curves on `[0, π]`.
///
/// A family that contains `kind` (or is closed under composition with it)
/// gives a near-zero residual; that is what lets an attacker reduce the
/// conversion with one more warp.
pub fn attack_reduce_residual(kind: &WarpKind, grid: &ParamGrid) -> Result<ReduceFit> {
    kind.validate()?;
    if !(grid.step > 0.0 && grid.lo <= grid.hi) {
        return arg_err("parameter grid needs step > 0 and lo <= hi");
    }
    let n = QUADRATURE_INTERVALS;
    let h = PI / n as f64;
    let target: Vec<f64> = (0..=n).map(|i| kind.apply(i as f64 * h)).collect();
    let mut best: Option<ReduceFit> = None;
    for c in grid.values() {
        let candidate = grid.family.member(c);
        if candidate.validate().is_err() {
            continue;
        }
        // composite Simpson on the same nodes as the cached target curve
        let residual = target
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let weight = match i {
                    0 => 1.0,
                    i if i == n => 1.0,
                    i if i % 2 == 1 => 4.0,
                    _ => 2.0,
                };
                weight * (t - candidate.apply(i as f64 * h)).abs()
            })
            .sum::<f64>()
            * h
            / 3.0;
        if best.map_or(true, |b| residual < b.residual) {
            best = Some(ReduceFit {
                residual,
                best_param: c,
            });
        }
    }
    best.map_or_else(|| arg_err("no valid parameter in grid"), Ok)
}
