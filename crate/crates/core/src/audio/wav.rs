use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioClip;
use crate::error::{Error, Result};

const FULL_SCALE: f64 = 32768.0;

/// While decoding, short reads mean a truncated or corrupt file.
fn map_decode(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::Format(format!("truncated or unreadable data: {e}")),
        other => map_hound(other),
    }
}

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::FormatError(msg) => Error::Format(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedFormat("unsupported WAV encoding".into()),
        other => Error::Format(other.to_string()),
    }
}

/// Reads a 16-bit PCM mono WAV file.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let file = File::open(path.as_ref())?;
    decode_wav(BufReader::new(file))
}

/// Decodes 16-bit PCM mono WAV data; samples are scaled by `1/32768`.
pub fn decode_wav<R: Read>(reader: R) -> Result<AudioClip> {
    let mut reader = WavReader::new(reader).map_err(map_decode)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels, only mono is supported",
            spec.channels
        )));
    }
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{:?} {}-bit samples, only 16-bit PCM is supported",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / FULL_SCALE))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(map_decode)?;
    AudioClip::new(samples, spec.sample_rate)
}

/// Writes `clip` as 16-bit PCM mono WAV. Samples are rounded to the nearest
/// integer step and clamped to `[-32768, 32767]`, so `1.0` is stored as `32767`.
pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    encode_wav(clip, BufWriter::new(file))
}

pub fn encode_wav<W: Write + Seek>(clip: &AudioClip, writer: W) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::new(writer, spec).map_err(map_hound)?;
    for &s in clip.samples() {
        writer.write_sample(quantize(s)).map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)
}

fn quantize(s: f64) -> i16 {
    (s * FULL_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}
