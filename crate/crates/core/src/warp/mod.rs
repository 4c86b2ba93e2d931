//! Frequency-warping voice conversion.
//!
//! All warps act on normalized angular frequency `ω ∈ [0, π]`, fix both
//! endpoints and are strictly increasing:
//!
//! * bilinear (all-pass phase): `f(ω, α) = |arg((z − α)/(1 − αz))|`, `z = e^{iω}`;
//!   `α > 0` stretches the low band (sharper voice), `α < 0` compresses it;
//! * quadratic: `g(ω, β) = ω + β(ω/π − (ω/π)²)`;
//! * compound: `h(ω, α, β) = g(f(ω, α), β)`.
//!
//! The bilinear family is closed under composition, which is what makes a
//! plain bilinear conversion reversible and reducible by anyone who can apply
//! a second warp; the compound family is not.

mod attack;
mod convert;
mod distortion;
mod functions;
mod sampler;
mod spectrum;

pub use attack::{
    attack_reduce_residual, attack_reverse, spectral_log_distance, ParamGrid, ReduceFit,
    WarpFamily,
};
pub use convert::{
    convert_voice, convert_voice_segmented, convert_with_marks, ConversionConfig,
    ConvertedSegment, SegmentedConversion,
};
pub use distortion::{distortion_strength, simpson, QUADRATURE_INTERVALS};
pub use functions::{
    compose_bilinear, inverse_warp, warp_bilinear, warp_compound, warp_quadratic, WarpKind,
    MONOTONE_GRID,
};
pub use sampler::{
    bilinear_alpha_range, sample_warp_params, Direction, DistortionBand, KindPolicy,
    BILINEAR_PROPER_RANGE, COMPOUND_ALPHA_MAX, COMPOUND_BETA_MAX, MAX_REJECTIONS,
};
pub use spectrum::{warp_spectrum, SpectralWarper};
