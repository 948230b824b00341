//! Second-order IIR sections (RBJ cookbook, Butterworth Q).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    pub fn highpass(cutoff: f64, sample_rate: f64) -> Self {
        let (cos, alpha) = prewarp(cutoff, sample_rate);
        let a0 = 1.0 + alpha;
        let k = (1.0 + cos) / 2.0;
        Self { b: [k / a0, -2.0 * k / a0, k / a0], a: [-2.0 * cos / a0, (1.0 - alpha) / a0] }
    }

    pub fn lowpass(cutoff: f64, sample_rate: f64) -> Self {
        let (cos, alpha) = prewarp(cutoff, sample_rate);
        let a0 = 1.0 + alpha;
        let k = (1.0 - cos) / 2.0;
        Self { b: [k / a0, 2.0 * k / a0, k / a0], a: [-2.0 * cos / a0, (1.0 - alpha) / a0] }
    }

    /// Runs the section over `x` in place (direct form II transposed).
    pub fn process(&self, x: &mut [f64]) {
        let (mut z1, mut z2) = (0.0, 0.0);
        for s in x.iter_mut() {
            let y = self.b[0] * *s + z1;
            z1 = self.b[1] * *s - self.a[0] * y + z2;
            z2 = self.b[2] * *s - self.a[1] * y;
            *s = y;
        }
    }
}

/// A [`Biquad`] that keeps its delay line between calls, for streams fed
/// in chunks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiquadState {
    coeffs: Biquad,
    z: [f64; 2],
}

impl BiquadState {
    pub fn new(coeffs: Biquad) -> Self {
        Self { coeffs, z: [0.0; 2] }
    }

    pub fn process(&mut self, x: &mut [f64]) {
        let (b, a) = (self.coeffs.b, self.coeffs.a);
        let [mut z1, mut z2] = self.z;
        for s in x.iter_mut() {
            let y = b[0] * *s + z1;
            z1 = b[1] * *s - a[0] * y + z2;
            z2 = b[2] * *s - a[1] * y;
            *s = y;
        }
        self.z = [z1, z2];
    }
}

fn prewarp(cutoff: f64, sample_rate: f64) -> (f64, f64) {
    let w0 = 2.0 * PI * cutoff / sample_rate;
    (w0.cos(), w0.sin() / (2.0 * FRAC_1_SQRT_2))
}

/// Fourth-order band-pass built from two high-pass and two low-pass
/// sections.
pub fn bandpass(x: &mut [f64], low: f64, high: f64, sample_rate: f64) {
    let hp = Biquad::highpass(low, sample_rate);
    let lp = Biquad::lowpass(high, sample_rate);
    hp.process(x);
    hp.process(x);
    lp.process(x);
    lp.process(x);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone_gain(f: Biquad, freq: f64, fs: f64) -> f64 {
        let mut x: Vec<f64> = (0..48_000).map(|i| (2.0 * PI * freq * i as f64 / fs).sin()).collect();
        f.process(&mut x);
        let tail = &x[24_000..];
        (tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64 * 2.0).sqrt()
    }

    #[test]
    fn chunked_state_matches_one_pass() {
        let x: Vec<f64> = (0..1_000).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let f = Biquad::highpass(100.0, 24_000.0);
        let mut whole = x.clone();
        f.process(&mut whole);
        let mut st = BiquadState::new(f);
        let mut parts = x.clone();
        let (a, b) = parts.split_at_mut(377);
        st.process(a);
        st.process(b);
        assert_eq!(parts, whole);
    }

    #[test]
    fn butterworth_corner_is_minus_3_db() {
        let fs = 24_000.0;
        let g = tone_gain(Biquad::highpass(200.0, fs), 200.0, fs);
        assert!((g - FRAC_1_SQRT_2).abs() < 0.01, "{g}");
        assert!(tone_gain(Biquad::highpass(200.0, fs), 2_000.0, fs) > 0.99);
        assert!(tone_gain(Biquad::lowpass(5_000.0, fs), 500.0, fs) > 0.99);
        assert!(tone_gain(Biquad::lowpass(5_000.0, fs), 10_000.0, fs) < 0.2);
    }
}
