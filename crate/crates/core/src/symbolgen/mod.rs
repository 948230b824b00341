//! V-PWM symbol generation.
//!
//! A symbol is a run of ON/OFF pulses whose switching periods are drawn
//! uniformly from a motor-safe range by a generator seeded with the
//! appliance ID. The duty cycle stays free so the appliance can change its
//! speed mid-symbol; the receiver only needs the period sequence.

mod correlate;
mod prng;
mod psd;

pub(crate) use correlate::correlate_slices;
pub use correlate::{cross_correlate, cross_correlate_full, normalized_alignment, SpectralCorrelator, TemplateSpectrum};
pub use prng::SplitMix64;
pub use psd::{psd_profile, Psd};

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{invalid, Result};

/// 16-bit appliance identifier; also the symbol seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ApplianceId(pub u16);

impl ApplianceId {
    pub fn value(self) -> u16 {
        self.0
    }
}

impl From<u16> for ApplianceId {
    fn from(v: u16) -> Self {
        Self(v)
    }
}

impl std::fmt::Display for ApplianceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Generator state for an appliance: the ID zero-extended to 64 bits.
pub fn expand_seed(id: ApplianceId) -> SplitMix64 {
    SplitMix64::new(u64::from(id.0))
}

/// Switching-period limits of a motor. `max_switch_period` must stay below
/// the motor time constant or the rotor stops turning smoothly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorProfile {
    pub time_constant: f64,
    pub min_switch_period: f64,
    pub max_switch_period: f64,
}

impl MotorProfile {
    pub fn new(time_constant: f64, min_switch_period: f64, max_switch_period: f64) -> Result<Self> {
        let p = Self { time_constant, min_switch_period, max_switch_period };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.time_constant, self.min_switch_period, self.max_switch_period].iter().all(|v| v.is_finite());
        if !finite || self.min_switch_period <= 0.0 {
            return invalid("switching periods must be positive and finite");
        }
        if self.min_switch_period >= self.max_switch_period {
            return invalid("min switching period must be below max switching period");
        }
        if self.max_switch_period >= self.time_constant {
            return invalid("max switching period must be below the motor time constant");
        }
        Ok(())
    }

    pub fn mean_switch_period(&self) -> f64 {
        0.5 * (self.min_switch_period + self.max_switch_period)
    }
}

impl Default for MotorProfile {
    /// 0.5 ms to 2 ms periods (500 Hz to 2 kHz switching) under a 10 ms
    /// time constant.
    fn default() -> Self {
        Self { time_constant: 0.010, min_switch_period: 0.0005, max_switch_period: 0.002 }
    }
}

/// Duty-cycle change requested while a symbol is being sent. It applies
/// from the first pulse that starts at or after `at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DutyEvent {
    pub at: f64,
    pub new_duty: f64,
}

/// One appliance symbol: the seeded period sequence plus its nominal duty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VpwmSymbol {
    id: ApplianceId,
    periods: Vec<f64>,
    duty_cycle: f64,
    length: f64,
    profile: MotorProfile,
}

/// Receiver-side duty for templates.
pub const TEMPLATE_DUTY: f64 = 0.5;

pub const DEFAULT_SAMPLE_RATE: u32 = 24_000;

impl VpwmSymbol {
    /// Draws periods until their running sum first reaches `duration`.
    pub fn generate(id: ApplianceId, duration: f64, profile: &MotorProfile) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return invalid(format!("symbol duration must be positive, got {duration}"));
        }
        profile.validate()?;
        let mut rng = expand_seed(id);
        let span = profile.max_switch_period - profile.min_switch_period;
        let mut periods = Vec::with_capacity((duration / profile.mean_switch_period()) as usize + 8);
        let mut length = 0.0;
        while length < duration {
            let t = profile.min_switch_period + rng.next_unit() * span;
            periods.push(t);
            length += t;
        }
        Ok(Self { id, periods, duty_cycle: TEMPLATE_DUTY, length, profile: *profile })
    }

    pub fn with_duty(mut self, duty: f64) -> Result<Self> {
        check_duty(duty)?;
        self.duty_cycle = duty;
        Ok(self)
    }

    pub fn id(&self) -> ApplianceId {
        self.id
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn duty_cycle(&self) -> f64 {
        self.duty_cycle
    }

    /// Actual duration, the sum of all periods.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn profile(&self) -> &MotorProfile {
        &self.profile
    }

    pub fn pulse_count(&self) -> usize {
        self.periods.len()
    }

    /// Number of samples the rendered waveform occupies.
    pub fn sample_len(&self, sample_rate: u32) -> usize {
        (self.length * sample_rate as f64).round() as usize
    }

    /// ON/OFF voltage waveform with values in {0, 1}.
    pub fn render_voltage(&self, duty_events: &[DutyEvent], sample_rate: u32) -> Result<AudioBuffer> {
        let fs = sample_rate as f64;
        if fs < 2.0 / self.profile.min_switch_period {
            return invalid(format!("sample rate {sample_rate} Hz is below 2 / min switching period"));
        }
        check_duty_events(duty_events, self.length)?;

        let n = self.sample_len(sample_rate);
        let mut samples = vec![0.0; n];
        let mut duty = self.duty_cycle;
        let mut events = duty_events.iter().peekable();
        let mut start = 0.0;
        // ON time owed so far, in samples; carrying the rounding residue keeps
        // the total ON count within half a sample of the exact value.
        let mut owed = 0.0;
        let mut emitted = 0_i64;
        for &period in &self.periods {
            while let Some(ev) = events.next_if(|ev| ev.at <= start) {
                duty = ev.new_duty;
            }
            let rise = ((start * fs).round() as usize).min(n);
            let next = (((start + period) * fs).round() as usize).min(n);
            owed += duty * (next - rise) as f64;
            let target = owed.round() as i64;
            let on_len = (target - emitted).max(0) as usize;
            emitted = target;
            samples[rise..(rise + on_len).min(next)].fill(1.0);
            start += period;
        }
        Ok(AudioBuffer::from_parts(samples, sample_rate, 0.0))
    }

    /// Receiver template: the 50%-duty waveform mapped to {-1, +1}.
    pub fn normalize_template(&self, sample_rate: u32) -> Result<AudioBuffer> {
        let sym = self.clone().with_duty(TEMPLATE_DUTY)?;
        let v = sym.render_voltage(&[], sample_rate)?;
        Ok(to_bipolar(&v))
    }
}

/// Maps a {0, 1} waveform onto {-1, +1}.
pub fn to_bipolar(voltage: &AudioBuffer) -> AudioBuffer {
    let samples = voltage.samples().iter().map(|&v| 2.0 * v - 1.0).collect();
    AudioBuffer::from_parts(samples, voltage.sample_rate(), voltage.start_time())
}

fn check_duty(duty: f64) -> Result<()> {
    if !(duty > 0.0 && duty < 1.0) {
        return invalid(format!("duty cycle must lie in (0, 1), got {duty}"));
    }
    Ok(())
}

fn check_duty_events(events: &[DutyEvent], length: f64) -> Result<()> {
    for ev in events {
        check_duty(ev.new_duty)?;
        if !(ev.at >= 0.0 && ev.at < length) {
            return invalid(format!("duty event at {} s is outside [0, {length})", ev.at));
        }
    }
    if events.windows(2).any(|w| w[1].at <= w[0].at) {
        return invalid("duty events must be strictly increasing in time");
    }
    Ok(())
}

/// Fixed-period PWM of the given length, used as the tonal reference.
pub fn fixed_pwm_voltage(period: f64, duty: f64, duration: f64, sample_rate: u32) -> Result<AudioBuffer> {
    stepped_pwm_voltage(&[(duration, period)], duty, sample_rate)
}

/// PWM whose period is held constant over consecutive segments given as
/// `(segment duration, period)`. Pulses never straddle a segment boundary.
pub fn stepped_pwm_voltage(segments: &[(f64, f64)], duty: f64, sample_rate: u32) -> Result<AudioBuffer> {
    check_duty(duty)?;
    if segments.iter().any(|&(d, p)| !(d > 0.0 && p > 0.0)) {
        return invalid("segment durations and periods must be positive");
    }
    let fs = sample_rate as f64;
    let total: f64 = segments.iter().map(|s| s.0).sum();
    let n = (total * fs).round() as usize;
    let mut samples = vec![0.0; n];
    let mut seg_start = 0.0;
    for &(dur, period) in segments {
        let pulses = (dur / period).round().max(1.0) as usize;
        for k in 0..pulses {
            let t = seg_start + k as f64 * period;
            let on = ((t * fs).round() as usize).min(n);
            let off = (((t + duty * period) * fs).round() as usize).min(n);
            samples[on..off].fill(1.0);
        }
        seg_start += dur;
    }
    Ok(AudioBuffer::from_parts(samples, sample_rate, 0.0))
}
