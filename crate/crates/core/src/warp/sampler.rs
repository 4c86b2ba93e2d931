use std::cell::RefCell;
use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{distortion_strength, WarpKind};
use crate::error::{Error, Result};

/// `|α|` range found to disguise the speaker while keeping speech intelligible.
pub const BILINEAR_PROPER_RANGE: (f64, f64) = (0.08, 0.10);
/// Box the compound sampler draws `(|α|, |β|)` from.
pub const COMPOUND_ALPHA_MAX: f64 = 0.12;
pub const COMPOUND_BETA_MAX: f64 = 0.5;
pub const MAX_REJECTIONS: usize = 10_000;

/// Which way the voice is pushed: negative factors deepen, positive sharpen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Deepen,
    #[default]
    Sharpen,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Deepen => -1.0,
            Direction::Sharpen => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindPolicy {
    #[serde(alias = "bilinear-only")]
    Bilinear,
    #[default]
    #[serde(alias = "compound-only")]
    Compound,
}

/// Accepted distortion-strength interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionBand {
    pub lo: f64,
    pub hi: f64,
    pub direction: Direction,
}

impl Default for DistortionBand {
    fn default() -> Self {
        Self {
            lo: 0.32,
            hi: 0.40,
            direction: Direction::Sharpen,
        }
    }
}

impl DistortionBand {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi.is_finite()) {
            return Err(Error::Configuration(format!(
                "distortion band [{}, {}] must satisfy 0 < lo < hi",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, dist: f64) -> bool {
        (self.lo..=self.hi).contains(&dist)
    }
}

/// Solves `distortion_strength(Bilinear(a)) = target` for `a ∈ [0, 0.9]` by
/// bisection; the strength is strictly increasing in `|a|`.
fn bilinear_alpha_for(target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 0.9);
    let dist = |a: f64| distortion_strength(&WarpKind::Bilinear { alpha: a });
    if target > dist(hi) {
        return Err(Error::Configuration(format!(
            "distortion {target} unreachable by a bilinear warp"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Range of `|α|` the bilinear policy samples from: the proper range
/// intersected with the band's preimage under the distortion strength.
pub fn bilinear_alpha_range(band: &DistortionBand) -> Result<(f64, f64)> {
    band.validate()?;
    thread_local! {
        static CACHE: RefCell<HashMap<(u64, u64), (f64, f64)>> = RefCell::new(HashMap::new());
    }
    let key = (band.lo.to_bits(), band.hi.to_bits());
    if let Some(range) = CACHE.with(|c| c.borrow().get(&key).copied()) {
        return Ok(range);
    }
    let lo = bilinear_alpha_for(band.lo)?.max(BILINEAR_PROPER_RANGE.0);
    let hi = bilinear_alpha_for(band.hi)?.min(BILINEAR_PROPER_RANGE.1);
    // bisection lands within ~1e-16 of the root, but keep the end points
    // strictly inside the band
    let lo = lo + 1e-12;
    let hi = hi - 1e-12;
    if lo >= hi {
        return Err(Error::Configuration(format!(
            "band [{}, {}] does not overlap the bilinear proper range",
            band.lo, band.hi
        )));
    }
    CACHE.with(|c| c.borrow_mut().insert(key, (lo, hi)));
    Ok((lo, hi))
}

/// Draws a warp whose distortion strength lies in `band`, pushing the voice
/// in `band.direction`.
pub fn sample_warp_params<R: Rng + ?Sized>(
    band: &DistortionBand,
    policy: KindPolicy,
    rng: &mut R,
) -> Result<WarpKind> {
    band.validate()?;
    let sign = band.direction.sign();
    match policy {
        KindPolicy::Bilinear => {
            let (lo, hi) = bilinear_alpha_range(band)?;
            Ok(WarpKind::Bilinear {
                alpha: sign * rng.gen_range(lo..=hi),
            })
        }
        KindPolicy::Compound => {
            for _ in 0..MAX_REJECTIONS {
                let alpha = sign * rng.gen_range(0.0..=COMPOUND_ALPHA_MAX);
                let beta = sign * rng.gen_range(0.0..=COMPOUND_BETA_MAX);
                if alpha == 0.0 || beta == 0.0 || alpha.signum() != beta.signum() {
                    continue;
                }
                let kind = WarpKind::Compound { alpha, beta };
                if band.contains(distortion_strength(&kind)) {
                    return Ok(kind);
                }
            }
            Err(Error::Configuration(format!(
                "{MAX_REJECTIONS} consecutive rejections sampling band [{}, {}]",
                band.lo, band.hi
            )))
        }
    }
}
