//! Mono WAV import and export.

use std::io::{Cursor, Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::resample::resample_rate;
use crate::audio::AudioBuffer;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavFormat {
    Pcm16,
    Float32,
}

/// Reads a WAV file and resamples it to `target_rate`. Multi-channel files
/// are averaged down to mono.
pub fn read_wav(path: impl AsRef<Path>, target_rate: u32) -> Result<AudioBuffer> {
    read_wav_from(WavReader::open(path)?, target_rate)
}

/// Decodes an in-memory WAV file.
pub fn read_wav_bytes(bytes: &[u8], target_rate: u32) -> Result<AudioBuffer> {
    read_wav_from(WavReader::new(Cursor::new(bytes))?, target_rate)
}

pub fn read_wav_from<R: Read>(reader: WavReader<R>, target_rate: u32) -> Result<AudioBuffer> {
    let spec = reader.spec();
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader.into_samples::<f32>().map(|s| s.map(f64::from)).collect::<std::result::Result<_, _>>()?,
        (SampleFormat::Int, bits @ 1..=32) => {
            let scale = 1.0 / (1_i64 << (bits - 1)) as f64;
            reader.into_samples::<i32>().map(|s| s.map(|v| v as f64 * scale)).collect::<std::result::Result<_, _>>()?
        }
        (fmt, bits) => return invalid(format!("unsupported WAV encoding {fmt:?} {bits}-bit")),
    };
    let channels = spec.channels.max(1) as usize;
    let mono: Vec<f64> = interleaved.chunks(channels).map(|c| c.iter().sum::<f64>() / channels as f64).collect();
    let samples = resample_rate(&mono, spec.sample_rate, target_rate);
    AudioBuffer::new(samples, target_rate)
}

pub fn write_wav(path: impl AsRef<Path>, audio: &AudioBuffer, format: WavFormat) -> Result<()> {
    let writer = WavWriter::create(path, wav_spec(audio.sample_rate(), format))?;
    write_samples(writer, audio, format)
}

pub fn write_wav_to<W: Write + Seek>(out: W, audio: &AudioBuffer, format: WavFormat) -> Result<()> {
    let writer = WavWriter::new(out, wav_spec(audio.sample_rate(), format))?;
    write_samples(writer, audio, format)
}

fn wav_spec(sample_rate: u32, format: WavFormat) -> WavSpec {
    match format {
        WavFormat::Pcm16 => WavSpec { channels: 1, sample_rate, bits_per_sample: 16, sample_format: SampleFormat::Int },
        WavFormat::Float32 => WavSpec { channels: 1, sample_rate, bits_per_sample: 32, sample_format: SampleFormat::Float },
    }
}

fn write_samples<W: Write + Seek>(mut writer: WavWriter<W>, audio: &AudioBuffer, format: WavFormat) -> Result<()> {
    for &s in audio.samples() {
        match format {
            // Full scale is +/-1; louder samples clip.
            WavFormat::Pcm16 => writer.write_sample((s.clamp(-1.0, 1.0) * 32_767.0).round() as i16)?,
            WavFormat::Float32 => writer.write_sample(s as f32)?,
        }
    }
    writer.finalize()?;
    Ok(())
}
