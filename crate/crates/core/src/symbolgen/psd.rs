//! Averaged-periodogram spectra and the tonal-prominence metric.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::AudioBuffer;
use crate::error::{invalid, Result};

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
    pub segments: usize,
}

impl Psd {
    /// Peak-to-median ratio in dB over every bin above DC.
    pub fn tonal_prominence_db(&self) -> f64 {
        let bins = &self.density[1..];
        let max = bins.iter().cloned().fold(f64::MIN, f64::max);
        10.0 * (max / median(bins)).log10()
    }

    /// Geometric over arithmetic mean of the bins above DC; 1 for a flat
    /// spectrum, near 0 for a line spectrum.
    pub fn spectral_flatness(&self) -> f64 {
        let bins = &self.density[1..];
        let floor = f64::MIN_POSITIVE;
        let log_mean = bins.iter().map(|p| p.max(floor).ln()).sum::<f64>() / bins.len() as f64;
        let mean = bins.iter().sum::<f64>() / bins.len() as f64;
        log_mean.exp() / mean
    }

    pub fn peak_frequency(&self) -> f64 {
        let (i, _) = self.density[1..].iter().enumerate().fold((0, f64::MIN), |best, (i, &p)| if p > best.1 { (i, p) } else { best });
        self.frequencies[i + 1]
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Welch estimate with Hann-windowed segments of `segment` seconds and 50%
/// overlap.
pub fn psd_profile(signal: &AudioBuffer, segment: f64) -> Result<Psd> {
    let fs = signal.sample_rate() as f64;
    let seg = (segment * fs).round() as usize;
    if seg < 4 {
        return invalid("segment is shorter than four samples");
    }
    if seg > signal.len() {
        return invalid(format!("segment of {seg} samples exceeds signal of {}", signal.len()));
    }
    let window: Vec<f64> = (0..seg).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / seg as f64).cos()).collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let hop = (seg / 2).max(1);
    let bins = seg / 2 + 1;
    let mut density = vec![0.0; bins];
    let mut segments = 0;
    let x = signal.samples();
    let mut start = 0;
    let mut buf = vec![Complex::new(0.0, 0.0); seg];
    while start + seg <= x.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(x[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (d, c) in density.iter_mut().zip(&buf) {
            *d += c.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (fs * win_power * segments as f64);
    for (k, d) in density.iter_mut().enumerate() {
        *d *= scale;
        if k != 0 && !(seg.is_multiple_of(2) && k == bins - 1) {
            *d *= 2.0;
        }
    }
    let frequencies = (0..bins).map(|k| k as f64 * fs / seg as f64).collect();
    Ok(Psd { frequencies, density, segments })
}
