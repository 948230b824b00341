use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::resample::resample_at_step;
use crate::audio::AudioBuffer;
use crate::error::{invalid, Result};

pub const DEFAULT_SOUND_SPEED: f64 = 343.0;

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    /// Seconds after the earliest path.
    pub delay: f64,
    pub gain: f64,
}

impl Tap {
    pub fn new(delay: f64, gain: f64) -> Self {
        Self { delay, gain }
    }
}

/// Path between one transmitter and the microphone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// EI power over lumped rotation-plus-ambient noise power, in dB.
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub cir_taps: Vec<Tap>,
    /// Radial speed in m/s, positive when approaching.
    pub doppler_speed: f64,
    pub sound_speed: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self { snr_db: f64::INFINITY, cir_taps: vec![Tap::new(0.0, 1.0)], doppler_speed: 0.0, sound_speed: DEFAULT_SOUND_SPEED }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        validate_taps(&self.cir_taps)?;
        if self.snr_db.is_nan() {
            return invalid("snr must not be NaN");
        }
        if !(self.sound_speed > 0.0) || self.doppler_speed.abs() >= self.sound_speed {
            return invalid("doppler speed must be below the speed of sound");
        }
        Ok(())
    }

    /// Doppler, then multipath, then noise measured against the signal
    /// power after the deterministic stages.
    pub fn apply(&self, signal: &AudioBuffer, seed: u64) -> Result<AudioBuffer> {
        self.validate()?;
        let moved = apply_doppler(signal, self.doppler_speed, self.sound_speed)?;
        let spread = apply_multipath(&moved, &self.cir_taps)?;
        if self.snr_db.is_infinite() && self.snr_db > 0.0 {
            return Ok(spread);
        }
        add_noise_at_snr(&spread, self.snr_db, seed)
    }
}

fn validate_taps(taps: &[Tap]) -> Result<()> {
    if taps.is_empty() {
        return invalid("channel needs at least one tap");
    }
    if taps.iter().any(|t| !(t.delay >= 0.0) || !t.gain.is_finite()) {
        return invalid("tap delays must be non-negative and gains finite");
    }
    if taps.windows(2).any(|w| w[1].delay <= w[0].delay) {
        return invalid("tap delays must be strictly increasing");
    }
    if taps.iter().any(|t| t.gain.abs() > 1.0) || taps.iter().all(|t| t.gain == 0.0) {
        return invalid("tap gains must lie in [-1, 1] with at least one non-zero");
    }
    Ok(())
}

/// Adds white Gaussian noise of the given power (variance).
pub fn add_white_noise(signal: &AudioBuffer, noise_power: f64, seed: u64) -> Result<AudioBuffer> {
    if !(noise_power >= 0.0) || !noise_power.is_finite() {
        return invalid("noise power must be finite and non-negative");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_power.sqrt()).expect("finite std");
    let samples = signal.samples().iter().map(|&s| s + normal.sample(&mut rng)).collect();
    Ok(AudioBuffer::from_parts(samples, signal.sample_rate(), signal.start_time()))
}

/// Adds white Gaussian noise so that signal power over noise power equals
/// `snr_db`, with the signal power measured over the whole buffer.
pub fn add_noise_at_snr(signal: &AudioBuffer, snr_db: f64, seed: u64) -> Result<AudioBuffer> {
    let p = signal.power();
    if p == 0.0 {
        return invalid("signal has zero power");
    }
    if snr_db.is_nan() {
        return invalid("snr must not be NaN");
    }
    add_white_noise(signal, p / 10f64.powf(snr_db / 10.0), seed)
}

/// Convolves with the tap impulse response; the output grows by the
/// longest delay.
pub fn apply_multipath(signal: &AudioBuffer, taps: &[Tap]) -> Result<AudioBuffer> {
    validate_taps(taps)?;
    let fs = signal.sample_rate() as f64;
    let shifts: Vec<(usize, f64)> = taps.iter().map(|t| ((t.delay * fs).round() as usize, t.gain)).collect();
    let max_shift = shifts.iter().map(|s| s.0).max().unwrap_or(0);
    let x = signal.samples();
    let mut out = vec![0.0; x.len() + max_shift];
    for &(shift, gain) in &shifts {
        for (o, &s) in out[shift..].iter_mut().zip(x) {
            *o += gain * s;
        }
    }
    Ok(AudioBuffer::from_parts(out, signal.sample_rate(), signal.start_time()))
}

/// Time-scale factor seen by the receiver for a source moving at `speed`.
pub fn doppler_factor(speed: f64, sound_speed: f64) -> f64 {
    1.0 + speed / sound_speed
}

/// Uniform Doppler: the waveform is played back `1 + v/c` times faster.
pub fn apply_doppler(signal: &AudioBuffer, speed: f64, sound_speed: f64) -> Result<AudioBuffer> {
    if !(sound_speed > 0.0) || !(speed.abs() < sound_speed) {
        return invalid(format!("|speed| {speed} must be below sound speed {sound_speed}"));
    }
    if speed == 0.0 || signal.is_empty() {
        return Ok(signal.clone());
    }
    let factor = doppler_factor(speed, sound_speed);
    let out_len = ((signal.len() - 1) as f64 / factor).floor() as usize + 1;
    let samples = resample_at_step(signal.samples(), factor, out_len, (1.0 / factor).min(1.0));
    Ok(AudioBuffer::from_parts(samples, signal.sample_rate(), signal.start_time()))
}

/// Sums buffers on their shared timeline, zero outside each one's support.
pub fn mix_sources(buffers: &[AudioBuffer]) -> Result<AudioBuffer> {
    let Some(first) = buffers.first() else {
        return invalid("nothing to mix");
    };
    let rate = first.sample_rate();
    if buffers.iter().any(|b| b.sample_rate() != rate) {
        return invalid("all sources must share one sample rate");
    }
    let t0 = buffers.iter().map(|b| b.start_time()).fold(f64::INFINITY, f64::min);
    let fs = rate as f64;
    let offsets: Vec<usize> = buffers.iter().map(|b| ((b.start_time() - t0) * fs).round() as usize).collect();
    let len = buffers.iter().zip(&offsets).map(|(b, &o)| o + b.len()).max().unwrap_or(0);
    let mut out = vec![0.0; len];
    for (b, &o) in buffers.iter().zip(&offsets) {
        for (dst, &s) in out[o..].iter_mut().zip(b.samples()) {
            *dst += s;
        }
    }
    Ok(AudioBuffer::from_parts(out, rate, t0))
}
