use super::config::DetectorConfig;
use super::stats::noise_stats;
use crate::audio::AudioBuffer;
use crate::error::{invalid, Result};
use crate::symbolgen::cross_correlate;

/// Channel impulse response read off the correlation around its main peak.
#[derive(Debug, Clone, PartialEq)]
pub struct CirEstimate {
    pub sample_rate: u32,
    /// Lag of the main peak from the window start, in samples.
    pub peak_offset: usize,
    /// Lags relative to the main peak.
    pub lags: Vec<i64>,
    /// Correlation divided by the main-peak value.
    pub amplitudes: Vec<f64>,
    /// Why the estimate is empty, when it is.
    pub diagnostic: Option<String>,
}

impl CirEstimate {
    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Strongest local maximum of |amplitude| at least `min_separation`
    /// samples away from the main peak, as `(lag, amplitude)`.
    pub fn secondary_peak(&self, min_separation: i64) -> Option<(i64, f64)> {
        let a = &self.amplitudes;
        (1..a.len().saturating_sub(1))
            .filter(|&i| self.lags[i].abs() >= min_separation)
            .filter(|&i| a[i].abs() >= a[i - 1].abs() && a[i].abs() >= a[i + 1].abs())
            .max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs()))
            .map(|i| (self.lags[i], a[i]))
    }
}

/// Correlates `template` over `window` and returns the `±span` seconds of
/// correlation around the dominant peak, normalised by that peak. Empty if
/// nothing clears the detection threshold.
pub fn extract_cir(window: &AudioBuffer, template: &AudioBuffer, span: f64, config: &DetectorConfig) -> Result<CirEstimate> {
    config.validate()?;
    if !(span >= 0.0) {
        return invalid("span must be non-negative");
    }
    let corr = cross_correlate(window, template)?;
    let stats = noise_stats(&corr, config.noise_trim_fraction);
    let (peak, mag) =
        corr.iter().enumerate().map(|(i, c)| (i, c.abs())).fold((0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
    let sample_rate = window.sample_rate();
    if stats.std <= 0.0 || stats.score(mag) < config.threshold_sigmas {
        return Ok(CirEstimate {
            sample_rate,
            peak_offset: peak,
            lags: Vec::new(),
            amplitudes: Vec::new(),
            diagnostic: Some(format!("no correlation peak above {} sigma (best {:.2})", config.threshold_sigmas, stats.score(mag))),
        });
    }
    let half = (span * sample_rate as f64).round() as i64;
    let lo = (peak as i64 - half).max(0);
    let hi = (peak as i64 + half).min(corr.len() as i64 - 1);
    let reference = corr[peak];
    let lags = (lo..=hi).map(|i| i - peak as i64).collect();
    let amplitudes = (lo..=hi).map(|i| corr[i as usize] / reference).collect();
    Ok(CirEstimate { sample_rate, peak_offset: peak, lags, amplitudes, diagnostic: None })
}
