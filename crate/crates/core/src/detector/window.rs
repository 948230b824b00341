use super::config::DetectorConfig;
use super::registry::Registry;
use super::stats::{noise_stats, NoiseStats};
use crate::audio::AudioBuffer;
use crate::error::{invalid, Result};
use crate::symbolgen::{ApplianceId, SpectralCorrelator};

/// A correlation peak above threshold inside one window.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDetection {
    pub id: ApplianceId,
    /// Lag in samples from the window start.
    pub offset: usize,
    /// Timeline position of the lag.
    pub time: f64,
    pub score: f64,
    /// Signed correlation value at the peak.
    pub peak: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowDetections {
    pub detections: Vec<RawDetection>,
    /// Templates longer than the window, which were not evaluated.
    pub skipped: Vec<ApplianceId>,
}

const NUMERIC_FLOOR: f64 = 1e-9;

/// Interior local maxima of `|corr|` scoring at least `threshold`, merged
/// so that no two kept peaks lie within `radius` samples; the higher peak
/// wins. Sorted by lag.
pub(crate) fn pick_peaks(corr: &[f64], stats: &NoiseStats, threshold: f64, radius: usize) -> Vec<(usize, f64)> {
    let mut peaks: Vec<(usize, f64)> = Vec::new();
    let largest = corr.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    // A floor at rounding-noise level carries no statistics.
    if corr.len() < 3 || stats.std <= NUMERIC_FLOOR * largest {
        return peaks;
    }
    let level = stats.mean + threshold * stats.std;
    for i in 1..corr.len() - 1 {
        let m = corr[i].abs();
        if m >= level && m > corr[i - 1].abs() && m >= corr[i + 1].abs() {
            let score = stats.score(m);
            match peaks.last_mut() {
                Some(last) if i - last.0 <= radius => {
                    if score > last.1 {
                        *last = (i, score);
                    }
                }
                _ => peaks.push((i, score)),
            }
        }
    }
    peaks
}

pub(crate) fn dedup_samples(config: &DetectorConfig, template_secs: f64, sample_rate: u32) -> usize {
    let r = config.dedup_radius_for(template_secs);
    (r * sample_rate as f64).round() as usize
}

/// Correlates one window with every registered template and reports the
/// peaks above `mean + threshold_sigmas * std` of that template's own
/// absolute correlation.
pub fn detect_window(window: &AudioBuffer, registry: &Registry, config: &DetectorConfig) -> Result<WindowDetections> {
    config.validate()?;
    if window.sample_rate() != registry.sample_rate() {
        return invalid("window and registry sample rates differ");
    }
    let mut out = WindowDetections::default();
    if window.is_empty() {
        out.skipped = registry.entries().map(|e| e.id).collect();
        return Ok(out);
    }
    let correlator = SpectralCorrelator::for_signal_len(window.len());
    let spectrum = correlator.spectrum(window.samples());
    let fs = window.sample_rate() as f64;
    for entry in registry.entries() {
        if entry.template.len() > window.len() {
            out.skipped.push(entry.id);
            continue;
        }
        let tpl = correlator.template(entry.template.samples());
        let corr = correlator.correlate(&spectrum, window.len(), &tpl);
        let stats = noise_stats(&corr, config.noise_trim_fraction);
        let radius = dedup_samples(config, entry.template.duration(), registry.sample_rate());
        for (lag, score) in pick_peaks(&corr, &stats, config.threshold_sigmas, radius) {
            out.detections.push(RawDetection {
                id: entry.id,
                offset: lag,
                time: window.start_time() + lag as f64 / fs,
                score,
                peak: corr[lag],
            });
        }
    }
    Ok(out)
}
