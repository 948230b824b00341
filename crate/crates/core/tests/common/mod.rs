#![allow(dead_code)]

use motorbeat::acoustics::add_white_noise;
use motorbeat::bench::synth::symbol_audio;
use motorbeat::symbolgen::{ApplianceId, MotorProfile, VpwmSymbol};
use motorbeat::AudioBuffer;

pub const FS: u32 = 24_000;

pub fn sound(id: u16, length: f64) -> AudioBuffer {
    let symbol = VpwmSymbol::generate(ApplianceId(id), length, &MotorProfile::default()).unwrap();
    symbol_audio(&symbol, 0.5, &Default::default(), FS).unwrap()
}

/// `duration` seconds of audio with each `(sound, start)` added in.
pub fn track(duration: f64, parts: &[(&AudioBuffer, f64)]) -> AudioBuffer {
    let mut out = vec![0.0; (duration * FS as f64).round() as usize];
    for (audio, start) in parts {
        let at = (start * FS as f64).round() as usize;
        for (o, &s) in out[at..].iter_mut().zip(audio.samples()) {
            *o += s;
        }
    }
    AudioBuffer::new(out, FS).unwrap()
}

/// Adds white noise `snr_db` below the power of `reference`.
pub fn noisy(track: &AudioBuffer, reference: &AudioBuffer, snr_db: f64, seed: u64) -> AudioBuffer {
    add_white_noise(track, reference.power() / 10f64.powf(snr_db / 10.0), seed).unwrap()
}
