use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::symbolgen::ApplianceId;

/// Detection threshold in standard deviations of the absolute correlation
/// above its mean.
///
/// On white noise the trimmed absolute correlation of a 2 s template has a
/// per-window false-alarm rate of 92% at 5σ, 2% at 7σ and 0.05% at 8σ; 10σ
/// keeps whole multi-window trials clean.
pub const DEFAULT_THRESHOLD_SIGMAS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// Window length as a multiple of the longest symbol.
    pub window_factor: f64,
    /// Hop between windows as a multiple of the longest symbol.
    pub slide_factor: f64,
    pub threshold_sigmas: f64,
    /// Detections of one appliance closer than this merge into one
    /// heartbeat. `None` uses the duration of that appliance's template.
    pub dedup_radius: Option<f64>,
    /// Fraction of the largest |correlation| values left out of the noise
    /// statistics.
    pub noise_trim_fraction: f64,
    /// While idle, only this appliance's template is correlated.
    pub preamble_id: Option<ApplianceId>,
    /// How long after a preamble the full registry stays active. `None`
    /// derives it from the longest registered frame.
    pub listen_duration: Option<f64>,
    /// Skip an appliance with a known heartbeat period until its next beat
    /// can arrive.
    pub skip_after_detect: bool,
    /// Optional high-pass applied to incoming audio, for recordings with
    /// DC offset or rumble.
    pub highpass_hz: Option<f64>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window_factor: 1.25,
            slide_factor: 0.25,
            threshold_sigmas: DEFAULT_THRESHOLD_SIGMAS,
            dedup_radius: None,
            noise_trim_fraction: 0.01,
            preamble_id: None,
            listen_duration: None,
            skip_after_detect: false,
            highpass_hz: None,
        }
    }
}

impl DetectorConfig {
    /// Merge radius for an appliance whose template lasts `template_secs`.
    ///
    /// A window holding only the head or tail of a symbol can peak up to
    /// one symbol duration away from the true start. Starts of one
    /// appliance are at least 1.25 requested symbol lengths apart, which
    /// exceeds the actual duration, so merging within it never joins two
    /// real symbols.
    pub fn dedup_radius_for(&self, template_secs: f64) -> f64 {
        self.dedup_radius.unwrap_or(template_secs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slide_factor > 0.0 && self.slide_factor <= self.window_factor) {
            return invalid("need 0 < slide_factor <= window_factor");
        }
        if self.window_factor < 1.0 {
            return invalid("windows must be at least one symbol long");
        }
        if !(self.threshold_sigmas > 0.0) {
            return invalid("threshold must be positive");
        }
        if !(0.0..0.5).contains(&self.noise_trim_fraction) {
            return invalid("noise trim fraction must lie in [0, 0.5)");
        }
        if self.dedup_radius.is_some_and(|r| !(r >= 0.0)) {
            return invalid("dedup radius must be non-negative");
        }
        if self.listen_duration.is_some_and(|d| !(d > 0.0)) {
            return invalid("listen duration must be positive");
        }
        if self.highpass_hz.is_some_and(|f| !(f > 0.0)) {
            return invalid("high-pass corner must be positive");
        }
        Ok(())
    }
}
