use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{arg_err, Result};

/// Smallest frame length accepted by [`fft_frame`].
pub const MIN_FFT_SIZE: usize = 64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Half spectrum of a real frame: `fft_size / 2 + 1` bins from DC to Nyquist.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    fft_size: usize,
    sample_rate_hz: u32,
}

impl Spectrum {
    pub fn new(bins: Vec<Complex64>, fft_size: usize, sample_rate_hz: u32) -> Result<Self> {
        check_size(fft_size)?;
        if bins.len() != fft_size / 2 + 1 {
            return arg_err(format!(
                "{} bins for fft size {fft_size}, expected {}",
                bins.len(),
                fft_size / 2 + 1
            ));
        }
        if bins[0].im != 0.0 || bins[fft_size / 2].im != 0.0 {
            return arg_err("DC and Nyquist bins must be real");
        }
        Ok(Self {
            bins,
            fft_size,
            sample_rate_hz,
        })
    }

    /// Builds a spectrum, discarding any imaginary part on the DC and Nyquist bins.
    pub(crate) fn from_half(mut bins: Vec<Complex64>, fft_size: usize, sample_rate_hz: u32) -> Self {
        debug_assert_eq!(bins.len(), fft_size / 2 + 1);
        bins[0].im = 0.0;
        bins[fft_size / 2].im = 0.0;
        Self {
            bins,
            fft_size,
            sample_rate_hz,
        }
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn num_bins(&self) -> usize {
        self.bins.len()
    }

    /// Center frequency of bin `k` in Hz.
    pub fn bin_frequency_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate_hz as f64 / self.fft_size as f64
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|c| c.norm()).collect()
    }
}

fn check_size(n: usize) -> Result<()> {
    if !n.is_power_of_two() || n < MIN_FFT_SIZE {
        return arg_err(format!(
            "frame length {n} is not a power of two >= {MIN_FFT_SIZE}"
        ));
    }
    Ok(())
}

/// Forward real FFT of one frame.
pub fn fft_frame(frame: &[f64], sample_rate_hz: u32) -> Result<Spectrum> {
    let n = frame.len();
    check_size(n)?;
    let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    buf.truncate(n / 2 + 1);
    Ok(Spectrum::from_half(buf, n, sample_rate_hz))
}

/// Inverse of [`fft_frame`]; the negative-frequency half is rebuilt by
/// Hermitian symmetry.
pub fn ifft_frame(spec: &Spectrum) -> Vec<f64> {
    let n = spec.fft_size;
    let mut buf = Vec::with_capacity(n);
    buf.extend_from_slice(&spec.bins);
    buf.extend(spec.bins[1..n / 2].iter().rev().map(|c| c.conj()));
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}
