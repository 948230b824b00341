use serde::{Deserialize, Serialize};

use super::filter::bandpass;
use crate::audio::AudioBuffer;
use crate::error::{invalid, Result};

/// How voltage edges turn into sound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EiMode {
    /// A decaying ringing burst at each edge, signed by edge direction.
    EdgeImpulse,
    /// The bipolar voltage itself, band-limited to the audible band.
    FilteredSquare,
}

/// Shape of the sound produced by one switching edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeKernel {
    pub center_frequency: f64,
    pub decay_time: f64,
    pub mode: EiMode,
}

impl Default for SpikeKernel {
    fn default() -> Self {
        Self { center_frequency: 6_000.0, decay_time: 0.0005, mode: EiMode::FilteredSquare }
    }
}

impl SpikeKernel {
    pub fn edge_impulse() -> Self {
        Self { mode: EiMode::EdgeImpulse, ..Self::default() }
    }

    /// `exp(-t/τ) sin(2π f t)` sampled until it has decayed by 10 time
    /// constants.
    pub fn impulse_response(&self, sample_rate: u32) -> Vec<f64> {
        let fs = sample_rate as f64;
        let n = ((10.0 * self.decay_time * fs).ceil() as usize).max(1);
        (0..n)
            .map(|k| {
                let t = k as f64 / fs;
                (-t / self.decay_time).exp() * (2.0 * std::f64::consts::PI * self.center_frequency * t).sin()
            })
            .collect()
    }
}

/// Lower edge of the filtered-square passband.
pub const PASSBAND_LOW: f64 = 200.0;

/// Edge positions and signs (+1 rising, -1 falling) of an ON/OFF waveform.
/// The level before the first sample is taken to equal the first sample,
/// so a constant waveform has no edges.
pub fn voltage_edges(voltage: &[f64]) -> Vec<(usize, f64)> {
    voltage.windows(2).enumerate().filter(|(_, w)| w[0] != w[1]).map(|(i, w)| (i + 1, if w[1] > w[0] { 1.0 } else { -1.0 })).collect()
}

/// Electromagnetism-induced sound of a voltage waveform, peak-normalised.
pub fn render_ei(voltage: &AudioBuffer, kernel: &SpikeKernel) -> Result<AudioBuffer> {
    if voltage.is_empty() {
        return invalid("empty voltage waveform");
    }
    let fs = voltage.sample_rate() as f64;
    if kernel.decay_time <= 0.0 {
        return invalid("spike decay time must be positive");
    }
    if !(kernel.center_frequency > 0.0 && kernel.center_frequency < fs / 2.0) {
        return invalid("spike centre frequency must lie below Nyquist");
    }
    let v = voltage.samples();
    let samples = match kernel.mode {
        EiMode::EdgeImpulse => {
            let h = kernel.impulse_response(voltage.sample_rate());
            let mut out = vec![0.0; v.len()];
            for (at, sign) in voltage_edges(v) {
                for (o, &hk) in out[at..].iter_mut().zip(&h) {
                    *o += sign * hk;
                }
            }
            out
        }
        EiMode::FilteredSquare => {
            let mut x: Vec<f64> = v.iter().map(|&s| 2.0 * s - 1.0).collect();
            bandpass(&mut x, PASSBAND_LOW, 0.9 * fs / 2.0, fs);
            x
        }
    };
    Ok(AudioBuffer::from_parts(samples, voltage.sample_rate(), voltage.start_time()).normalized_peak())
}
