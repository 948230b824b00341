//! Sliding dot products between received audio and symbol templates.
//!
//! Correlation runs in the frequency domain. A template is transformed
//! once into a [`TemplateSpectrum`]; each window is transformed once and
//! multiplied against every template sharing the same FFT length.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::AudioBuffer;
use crate::error::{invalid, Result};

/// Below this many multiply-adds the direct sum is cheaper than two FFTs.
const DIRECT_LIMIT: usize = 1 << 20;

/// Conjugated spectrum of a zero-padded template.
#[derive(Clone)]
pub struct TemplateSpectrum {
    len: usize,
    energy: f64,
    bins: Vec<Complex<f64>>,
}

impl TemplateSpectrum {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sum of squares of the template, i.e. its autocorrelation peak.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn fft_len(&self) -> usize {
        self.bins.len()
    }
}

impl std::fmt::Debug for TemplateSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TemplateSpectrum").field("len", &self.len).field("fft_len", &self.bins.len()).finish()
    }
}

/// FFT plans for one transform length.
#[derive(Clone)]
pub struct SpectralCorrelator {
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralCorrelator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralCorrelator").field("fft_len", &self.fft_len).finish()
    }
}

impl SpectralCorrelator {
    /// Plans transforms large enough for signals of up to `max_signal_len`
    /// samples.
    pub fn for_signal_len(max_signal_len: usize) -> Self {
        Self::with_fft_len(max_signal_len.max(1).next_power_of_two())
    }

    pub fn with_fft_len(fft_len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { fft_len, forward: planner.plan_fft_forward(fft_len), inverse: planner.plan_fft_inverse(fft_len) }
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn template(&self, template: &[f64]) -> TemplateSpectrum {
        assert!(template.len() <= self.fft_len, "template longer than FFT");
        let mut bins = self.spectrum(template);
        bins.iter_mut().for_each(|c| *c = c.conj());
        TemplateSpectrum { len: template.len(), energy: template.iter().map(|x| x * x).sum(), bins }
    }

    /// Zero-padded forward transform of `signal`.
    pub fn spectrum(&self, signal: &[f64]) -> Vec<Complex<f64>> {
        assert!(signal.len() <= self.fft_len, "signal longer than FFT");
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_len];
        for (b, &s) in buf.iter_mut().zip(signal) {
            b.re = s;
        }
        self.forward.process(&mut buf);
        buf
    }

    /// Valid-mode correlation of a transformed signal of `signal_len`
    /// samples against a template: `signal_len - template.len() + 1` lags.
    pub fn correlate(&self, signal_spectrum: &[Complex<f64>], signal_len: usize, template: &TemplateSpectrum) -> Vec<f64> {
        assert_eq!(template.bins.len(), self.fft_len, "template planned for another FFT length");
        assert!(template.len <= signal_len && signal_len <= self.fft_len);
        let mut buf: Vec<Complex<f64>> = signal_spectrum.iter().zip(&template.bins).map(|(a, b)| a * b).collect();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.fft_len as f64;
        buf[..signal_len - template.len + 1].iter().map(|c| c.re * scale).collect()
    }
}

/// Sliding dot product of template `b` over signal `a` at every lag where
/// `b` lies fully inside `a`.
pub fn cross_correlate(a: &AudioBuffer, b: &AudioBuffer) -> Result<Vec<f64>> {
    if a.sample_rate() != b.sample_rate() {
        return invalid(format!("sample rates differ: {} vs {}", a.sample_rate(), b.sample_rate()));
    }
    if b.is_empty() || b.len() > a.len() {
        return invalid("template must be non-empty and no longer than the signal");
    }
    Ok(correlate_slices(a.samples(), b.samples()))
}

pub(crate) fn correlate_slices(a: &[f64], b: &[f64]) -> Vec<f64> {
    let lags = a.len() - b.len() + 1;
    if lags.saturating_mul(b.len()) <= DIRECT_LIMIT {
        return (0..lags).map(|k| dot(&a[k..k + b.len()], b)).collect();
    }
    let c = SpectralCorrelator::for_signal_len(a.len());
    let spec = c.spectrum(a);
    c.correlate(&spec, a.len(), &c.template(b))
}

/// Correlation at every lag with any overlap, from `-(len(b) - 1)` to
/// `len(a) - 1`. Returns `(first_lag, values)`.
pub fn cross_correlate_full(a: &AudioBuffer, b: &AudioBuffer) -> Result<(i64, Vec<f64>)> {
    if a.sample_rate() != b.sample_rate() {
        return invalid("sample rates differ");
    }
    if a.is_empty() || b.is_empty() {
        return invalid("empty input");
    }
    let (la, lb) = (a.len(), b.len());
    let total = la + lb - 1;
    let c = SpectralCorrelator::for_signal_len(total);
    let n = c.fft_len();
    let sa = c.spectrum(a.samples());
    let tb = c.template(b.samples());
    let mut buf: Vec<Complex<f64>> = sa.iter().zip(&tb.bins).map(|(x, y)| x * y).collect();
    c.inverse.process(&mut buf);
    let scale = 1.0 / n as f64;
    let values = (0..total)
        .map(|j| {
            let lag = j as i64 - (lb as i64 - 1);
            buf[lag.rem_euclid(n as i64) as usize].re * scale
        })
        .collect();
    Ok((-(lb as i64 - 1), values))
}

/// Cosine similarity of two equally aligned buffers over their common
/// prefix.
pub fn normalized_alignment(a: &AudioBuffer, b: &AudioBuffer) -> Result<f64> {
    if a.sample_rate() != b.sample_rate() {
        return invalid("sample rates differ");
    }
    let n = a.len().min(b.len());
    let (x, y) = (&a.samples()[..n], &b.samples()[..n]);
    let denom = (dot(x, x) * dot(y, y)).sqrt();
    if denom == 0.0 {
        return invalid("zero-energy input");
    }
    Ok(dot(x, y) / denom)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
