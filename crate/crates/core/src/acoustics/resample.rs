//! Band-limited fractional resampling with a Blackman-windowed sinc.

use std::f64::consts::PI;

/// Kernel half-width in input samples (at unit cutoff).
const HALF_TAPS: usize = 32;

/// Evaluates `x` at positions `j * step` for `j < out_len`, low-passing at
/// `cutoff` (fraction of the input Nyquist rate) to prevent aliasing when
/// compressing.
pub fn resample_at_step(x: &[f64], step: f64, out_len: usize, cutoff: f64) -> Vec<f64> {
    let cutoff = cutoff.clamp(1e-3, 1.0);
    let half = (HALF_TAPS as f64 / cutoff).ceil() as i64;
    (0..out_len)
        .map(|j| {
            let pos = j as f64 * step;
            let centre = pos.round();
            if (pos - centre).abs() < 1e-12 && cutoff == 1.0 {
                return x.get(centre as usize).copied().unwrap_or(0.0);
            }
            let base = pos.floor() as i64;
            let mut acc = 0.0;
            for k in (base - half + 1)..=(base + half) {
                if k < 0 || k as usize >= x.len() {
                    continue;
                }
                let t = pos - k as f64;
                acc += x[k as usize] * kernel(t, cutoff, half as f64);
            }
            acc
        })
        .collect()
}

fn kernel(t: f64, cutoff: f64, half: f64) -> f64 {
    if t.abs() >= half {
        return 0.0;
    }
    let arg = PI * cutoff * t;
    let sinc = if arg.abs() < 1e-12 { 1.0 } else { arg.sin() / arg };
    let w = 0.42 + 0.5 * (PI * t / half).cos() + 0.08 * (2.0 * PI * t / half).cos();
    cutoff * sinc * w
}

/// Converts between sample rates.
pub fn resample_rate(x: &[f64], from: u32, to: u32) -> Vec<f64> {
    if from == to {
        return x.to_vec();
    }
    let step = from as f64 / to as f64;
    let out_len = ((x.len() as f64) / step).floor() as usize;
    resample_at_step(x, step, out_len, (to as f64 / from as f64).min(1.0))
}
