//! Speech sanitization toolkit.
//!
//! The crate is organised around the stages of the sanitizer:
//!
//! * [`audio`]: PCM container, WAV I/O, FFT/STFT and silence-gap detection.
//! * [`pitch`]: autocorrelation pitch marking and pitch-synchronous
//!   overlap-add (PSOLA) segmentation/resynthesis.
//! * [`warp`]: frequency-warping functions, distortion strength, randomized
//!   parameter sampling, the voice-conversion pipeline and attack simulators.
//! * [`keyword`]: DTW keyword spotting with evolving templates, safeword
//!   substitution and transcript restoration.
//! * [`praka`]: two-bit randomized-response keyword reporting and the
//!   server-side frequency estimator with its exact error bound.
//! * [`synth`]: deterministic synthetic signals (tones, vowels, pseudo-words)
//!   used by tests, benchmarks and demos.

pub mod audio;
pub mod error;
pub mod keyword;
pub mod pitch;
pub mod praka;
pub mod synth;
pub mod warp;

pub use error::{Error, Result};
