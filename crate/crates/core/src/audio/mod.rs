//! Audio container, WAV I/O, frame FFT, STFT features and silence detection.

mod clip;
mod fft;
mod silence;
mod stft;
mod wav;

pub use clip::{AudioClip, SUPPORTED_RATES};
pub use fft::{fft_frame, hann_window, ifft_frame, Spectrum, MIN_FFT_SIZE};
pub use silence::{detect_silence_gaps, SilenceGap};
pub use stft::{stft, stft_with, FeatureMatrix, FeatureNormalization, StftConfig, LOG_FLOOR_DB};
pub use wav::{decode_wav, encode_wav, read_wav, write_wav};
