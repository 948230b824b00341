//! Sampled waveform container shared by every stage of the stack.

use crate::error::{invalid, Result};

/// Uniformly sampled mono waveform placed on a shared timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
    start_time: f64,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::with_start(samples, sample_rate, 0.0)
    }

    pub fn with_start(samples: Vec<f64>, sample_rate: u32, start_time: f64) -> Result<Self> {
        if sample_rate == 0 {
            return invalid("sample rate must be positive");
        }
        if !start_time.is_finite() {
            return invalid("start time must be finite");
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return invalid(format!("non-finite sample at index {i}"));
        }
        Ok(Self { samples, sample_rate, start_time })
    }

    /// Constructor for buffers produced internally from finite arithmetic.
    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: u32, start_time: f64) -> Self {
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self { samples, sample_rate, start_time }
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn set_start_time(&mut self, start_time: f64) {
        self.start_time = start_time;
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration()
    }

    /// Mean square value; zero for an empty buffer.
    pub fn power(&self) -> f64 {
        power(&self.samples)
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    /// Scales the buffer so the largest magnitude equals one. All-zero
    /// buffers are returned unchanged.
    pub fn normalized_peak(mut self) -> Self {
        let peak = self.peak();
        if peak > 0.0 {
            self.samples.iter_mut().for_each(|s| *s /= peak);
        }
        self
    }

    pub fn scaled(mut self, gain: f64) -> Self {
        self.samples.iter_mut().for_each(|s| *s *= gain);
        self
    }

    /// Sample index of a timeline instant, rounded to the nearest sample.
    pub fn index_of(&self, time: f64) -> i64 {
        ((time - self.start_time) * self.sample_rate as f64).round() as i64
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.start_time + index as f64 / self.sample_rate as f64
    }

    /// Copy of `[from, to)` in samples, clamped to the buffer.
    pub fn slice(&self, from: usize, to: usize) -> Self {
        let to = to.min(self.samples.len());
        let from = from.min(to);
        Self::from_parts(self.samples[from..to].to_vec(), self.sample_rate, self.time_of(from))
    }
}

pub(crate) fn power(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64
}
