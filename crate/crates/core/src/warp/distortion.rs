use std::f64::consts::PI;

use super::WarpKind;

/// Number of composite Simpson intervals over `[0, π]`.
pub const QUADRATURE_INTERVALS: usize = 4096;

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = (intervals + intervals % 2).max(2);
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| {
            let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
            weight * f(a + i as f64 * h)
        })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Area between the warp curve and the identity on `[0, π]`.
///
/// Zero exactly for the identity warp. `kind` is assumed valid.
pub fn distortion_strength(kind: &WarpKind) -> f64 {
    if kind.is_identity() {
        return 0.0;
    }
    simpson(
        |w| (kind.apply(w) - w).abs(),
        0.0,
        PI,
        QUADRATURE_INTERVALS,
    )
}
