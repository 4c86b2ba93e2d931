use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};

/// Grid size used for the numeric monotonicity check.
pub const MONOTONE_GRID: usize = 1024;

/// A warping function together with its factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WarpKind {
    Bilinear { alpha: f64 },
    Quadratic { beta: f64 },
    Compound { alpha: f64, beta: f64 },
}

impl WarpKind {
    pub fn identity() -> Self {
        WarpKind::Bilinear { alpha: 0.0 }
    }

    pub fn bilinear(alpha: f64) -> Result<Self> {
        let k = WarpKind::Bilinear { alpha };
        k.validate()?;
        Ok(k)
    }

    pub fn quadratic(beta: f64) -> Result<Self> {
        let k = WarpKind::Quadratic { beta };
        k.validate()?;
        Ok(k)
    }

    pub fn compound(alpha: f64, beta: f64) -> Result<Self> {
        let k = WarpKind::Compound { alpha, beta };
        k.validate()?;
        Ok(k)
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            WarpKind::Bilinear { alpha } | WarpKind::Compound { alpha, .. } => alpha,
            WarpKind::Quadratic { .. } => 0.0,
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            WarpKind::Quadratic { beta } | WarpKind::Compound { beta, .. } => beta,
            WarpKind::Bilinear { .. } => 0.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.alpha() == 0.0 && self.beta() == 0.0
    }

    /// Checks the factor bounds and strict monotonicity on a
    /// [`MONOTONE_GRID`]-point grid.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.alpha(), self.beta());
        if !a.is_finite() || a.abs() >= 1.0 {
            return arg_err(format!("bilinear factor {a} outside (-1, 1)"));
        }
        if !b.is_finite() || b.abs() >= PI {
            return arg_err(format!("quadratic factor {b} breaks monotonicity (|beta| >= pi)"));
        }
        if !self.is_monotone_on_grid(MONOTONE_GRID) {
            return arg_err(format!("{self:?} is not strictly increasing on [0, pi]"));
        }
        Ok(())
    }

    pub fn is_monotone_on_grid(&self, points: usize) -> bool {
        let step = PI / (points - 1) as f64;
        let mut prev = self.apply(0.0);
        (1..points).all(|i| {
            let v = self.apply(i as f64 * step);
            let ok = v > prev;
            prev = v;
            ok
        })
    }

    /// Forward warp without validation; callers must have validated `self`.
    pub fn apply(&self, omega: f64) -> f64 {
        match *self {
            WarpKind::Bilinear { alpha } => bilinear(omega, alpha),
            WarpKind::Quadratic { beta } => quadratic(omega, beta),
            WarpKind::Compound { alpha, beta } => quadratic(bilinear(omega, alpha), beta),
        }
    }

    /// Inverse warp without validation of `self`.
    pub fn invert(&self, omega_out: f64) -> Result<f64> {
        match *self {
            WarpKind::Bilinear { alpha } => Ok(bilinear(omega_out, -alpha)),
            WarpKind::Quadratic { beta } => quadratic_inverse(omega_out, beta),
            WarpKind::Compound { alpha, beta } => {
                Ok(bilinear(quadratic_inverse(omega_out, beta)?, -alpha))
            }
        }
    }
}

fn bilinear(omega: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return omega;
    }
    let z = Complex64::from_polar(1.0, omega.clamp(0.0, PI));
    let w = (z - alpha) / (1.0 - alpha * z);
    // -i ln w = arg w - i ln|w| and |w| = 1 on the unit circle
    w.arg().abs().clamp(0.0, PI)
}

fn quadratic(omega: f64, beta: f64) -> f64 {
    let u = omega / PI;
    omega + beta * (u - u * u)
}

fn quadratic_inverse(omega_out: f64, beta: f64) -> Result<f64> {
    // β u² − (π + β) u + ω′ = 0 with ω = π u; the smaller root, written in
    // the cancellation-free form 2ω′ / ((π + β) + √D).
    let b = PI + beta;
    let disc = b * b - 4.0 * beta * omega_out;
    if disc < 0.0 {
        return Err(Error::Numeric(format!(
            "negative discriminant {disc} inverting quadratic warp with beta {beta}"
        )));
    }
    let u = 2.0 * omega_out / (b + disc.sqrt());
    Ok(PI * u)
}

/// Bilinear (all-pass) warp of `omega` by `alpha`.
pub fn warp_bilinear(omega: f64, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha.abs() >= 1.0 {
        return arg_err(format!("bilinear factor {alpha} outside (-1, 1)"));
    }
    Ok(bilinear(omega, alpha))
}

/// Quadratic warp `ω + β(ω/π − (ω/π)²)`.
pub fn warp_quadratic(omega: f64, beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta.abs() >= PI {
        return arg_err(format!("quadratic factor {beta} breaks monotonicity"));
    }
    Ok(quadratic(omega, beta))
}

/// Quadratic warp applied to the bilinear warp's output.
pub fn warp_compound(omega: f64, alpha: f64, beta: f64) -> Result<f64> {
    warp_quadratic(warp_bilinear(omega, alpha)?, beta)
}

pub fn inverse_warp(kind: &WarpKind, omega_out: f64) -> Result<f64> {
    let (a, b) = (kind.alpha(), kind.beta());
    if !a.is_finite() || a.abs() >= 1.0 || !b.is_finite() || b.abs() >= PI {
        return arg_err(format!("invalid warp {kind:?}"));
    }
    kind.invert(omega_out)
}

/// Parameter of the single bilinear warp equal to applying `alpha1` then
/// `alpha2`: `(α1 + α2) / (1 + α1 α2)`.
pub fn compose_bilinear(alpha1: f64, alpha2: f64) -> f64 {
    (alpha1 + alpha2) / (1.0 + alpha1 * alpha2)
}
