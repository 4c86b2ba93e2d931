use std::f64::consts::PI;

use num_complex::Complex64;

use super::WarpKind;
use crate::audio::Spectrum;
use crate::error::Result;

/// Precomputed source positions for warping half spectra of one size.
///
/// Output bin `j` sits at `ω′ = πj/(B−1)`; its value is the input spectrum
/// linearly interpolated (real and imaginary parts separately) at the
/// fractional bin of `inverse_warp(ω′)`.
#[derive(Debug, Clone)]
pub struct SpectralWarper {
    kind: WarpKind,
    num_bins: usize,
    /// `(lower bin, weight of upper bin)` per output bin.
    taps: Vec<(usize, f64)>,
}

impl SpectralWarper {
    pub fn new(kind: WarpKind, num_bins: usize) -> Result<Self> {
        kind.validate()?;
        let last = num_bins - 1;
        let scale = last as f64 / PI;
        let taps = (0..num_bins)
            .map(|j| {
                if j == 0 || j == last {
                    return Ok((j, 0.0));
                }
                let src = kind.invert(j as f64 / scale)? * scale;
                let src = src.clamp(0.0, last as f64);
                let lower = (src.floor() as usize).min(last - 1);
                Ok((lower, src - lower as f64))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            kind,
            num_bins,
            taps,
        })
    }

    pub fn kind(&self) -> &WarpKind {
        &self.kind
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn apply(&self, spec: &Spectrum) -> Spectrum {
        assert_eq!(spec.num_bins(), self.num_bins, "warper built for another size");
        if self.kind.is_identity() {
            return spec.clone();
        }
        let bins = spec.bins();
        let last = self.num_bins - 1;
        let out: Vec<Complex64> = self
            .taps
            .iter()
            .enumerate()
            .map(|(j, &(lower, t))| {
                if j == 0 || j == last {
                    return bins[j];
                }
                let (a, b) = (bins[lower], bins[lower + 1]);
                Complex64::new(a.re + t * (b.re - a.re), a.im + t * (b.im - a.im))
            })
            .collect();
        Spectrum::from_half(out, spec.fft_size(), spec.sample_rate_hz())
    }
}

/// Stretches or compresses `spec` along the frequency axis by `kind`.
/// DC and Nyquist are carried over unchanged.
pub fn warp_spectrum(spec: &Spectrum, kind: &WarpKind) -> Result<Spectrum> {
    Ok(SpectralWarper::new(*kind, spec.num_bins())?.apply(spec))
}
