use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::DetectorConfig;
use super::events::{Event, Heartbeat};
use super::frames::FrameAssembler;
use super::registry::Registry;
use super::stats::noise_stats;
use super::window::{dedup_samples, pick_peaks, RawDetection};
use crate::acoustics::filter::{Biquad, BiquadState};
use crate::audio::AudioBuffer;
use crate::error::{invalid, Result};
use crate::symbolgen::{ApplianceId, SpectralCorrelator, TemplateSpectrum};
use crate::timecode::GUARD_FACTOR;

/// Lag, score and raw correlation of one peak.
type Peak = (usize, f64, f64);

/// Work done so far, for cost accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReceiverCounters {
    pub windows: u64,
    /// Template correlations actually executed.
    pub correlations: u64,
}

struct Slot {
    id: ApplianceId,
    spectrum: TemplateSpectrum,
    radius_samples: usize,
    radius: f64,
    period: Option<f64>,
    symbol_length: f64,
    preamble: bool,
}

/// Streaming receiver: feed audio chunks in timeline order, collect events.
///
/// Windows of `window_factor` symbol lengths are evaluated every
/// `slide_factor` symbol lengths, using the longest registered symbol.
/// Each window is transformed once and correlated against every active
/// template; raw peaks of one appliance within the dedup radius collapse
/// into the one with the largest |correlation| before being emitted as a
/// heartbeat. Scores are relative to each window's own noise floor, so
/// only the raw correlation is comparable across windows.
pub struct Receiver {
    config: DetectorConfig,
    sample_rate: u32,
    correlator: SpectralCorrelator,
    slots: Vec<Slot>,
    window_len: usize,
    slide_len: usize,
    buffer: Vec<f64>,
    buffer_origin: u64,
    origin_time: Option<f64>,
    received: u64,
    next_window: u64,
    pending: BTreeMap<ApplianceId, RawDetection>,
    skip_until: BTreeMap<ApplianceId, f64>,
    listen_until: f64,
    listen_duration: f64,
    assemblers: BTreeMap<ApplianceId, FrameAssembler>,
    highpass: Option<BiquadState>,
    counters: ReceiverCounters,
    diagnostics: Vec<String>,
    finished: bool,
}

impl std::fmt::Debug for Receiver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Receiver")
            .field("templates", &self.slots.len())
            .field("window_len", &self.window_len)
            .field("slide_len", &self.slide_len)
            .field("counters", &self.counters)
            .finish()
    }
}

impl Receiver {
    pub fn new(registry: &Registry, config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        if let Some(p) = config.preamble_id {
            if !registry.contains(p) {
                return invalid(format!("preamble appliance {p} is not registered"));
            }
        }
        let fs = registry.sample_rate() as f64;
        let reference = registry.max_symbol_length();
        let slide_len = ((config.slide_factor * reference * fs).round() as usize).max(1);
        // Every start must be an interior lag of at least one window.
        let window_len = ((config.window_factor * reference * fs).round() as usize).max(registry.max_template_len() + slide_len + 2);
        let correlator = SpectralCorrelator::for_signal_len(window_len);
        let slots = registry
            .entries()
            .map(|e| Slot {
                id: e.id,
                spectrum: correlator.template(e.template.samples()),
                radius_samples: dedup_samples(&config, e.template.duration(), registry.sample_rate()),
                radius: config.dedup_radius_for(e.template.duration()),
                period: e.heartbeat_period,
                symbol_length: e.codec.symbol_length,
                preamble: config.preamble_id == Some(e.id),
            })
            .collect();
        let assemblers =
            registry.entries().filter(|e| config.preamble_id != Some(e.id)).map(|e| (e.id, FrameAssembler::new(e.codec))).collect();
        let listen_duration = config.listen_duration.unwrap_or_else(|| {
            registry
                .entries()
                .map(|e| GUARD_FACTOR * e.codec.symbol_length + (e.codec.symbols_per_frame as f64 - 1.0) * e.codec.max_interval())
                .fold(0.0, f64::max)
                + window_len as f64 / fs
        });
        let highpass = config.highpass_hz.map(|f| BiquadState::new(Biquad::highpass(f, fs)));
        Ok(Self {
            config,
            sample_rate: registry.sample_rate(),
            correlator,
            slots,
            window_len,
            slide_len,
            buffer: Vec::new(),
            buffer_origin: 0,
            origin_time: None,
            received: 0,
            next_window: 0,
            pending: BTreeMap::new(),
            skip_until: BTreeMap::new(),
            listen_until: f64::NEG_INFINITY,
            listen_duration,
            assemblers,
            highpass,
            counters: ReceiverCounters::default(),
            diagnostics: Vec::new(),
            finished: false,
        })
    }

    pub fn counters(&self) -> ReceiverCounters {
        self.counters
    }

    /// Window and hop length in samples.
    pub fn window_geometry(&self) -> (usize, usize) {
        (self.window_len, self.slide_len)
    }

    /// Non-fatal conditions seen so far (gaps, partial frames).
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    fn fs(&self) -> f64 {
        self.sample_rate as f64
    }

    fn time_of(&self, abs: u64) -> f64 {
        self.origin_time.unwrap_or(0.0) + abs as f64 / self.fs()
    }

    /// Appends a chunk. Chunks must arrive in timeline order; a chunk that
    /// starts after the end of the previous one is preceded by silence.
    pub fn push(&mut self, chunk: &AudioBuffer) -> Result<Vec<Event>> {
        if self.finished {
            return invalid("receiver already finished");
        }
        if chunk.sample_rate() != self.sample_rate {
            return invalid(format!("chunk sample rate {} differs from {}", chunk.sample_rate(), self.sample_rate));
        }
        let origin = *self.origin_time.get_or_insert(chunk.start_time());
        let at = ((chunk.start_time() - origin) * self.fs()).round() as i64;
        if at < self.received as i64 {
            return invalid(format!(
                "out-of-order chunk starting at {:.6} s; expected {:.6} s or later",
                chunk.start_time(),
                self.time_of(self.received)
            ));
        }
        let gap = at as u64 - self.received;
        if gap > 0 {
            self.diagnostics.push(format!("{gap} missing samples before {:.6} s filled with silence", chunk.start_time()));
            self.buffer.extend(std::iter::repeat_n(0.0, gap as usize));
        }
        let mut samples = chunk.samples().to_vec();
        if let Some(hp) = self.highpass.as_mut() {
            hp.process(&mut samples);
        }
        self.buffer.extend_from_slice(&samples);
        self.received = at as u64 + chunk.len() as u64;

        let mut events = Vec::new();
        if self.slots.is_empty() {
            self.buffer.clear();
            self.buffer_origin = self.received;
            return Ok(events);
        }
        while self.next_window + self.window_len as u64 <= self.received {
            self.process_window(&mut events);
        }
        Ok(events)
    }

    /// Flushes the tail of the stream, pending heartbeats and open frames.
    pub fn finish(&mut self) -> Vec<Event> {
        let mut events = Vec::new();
        if self.finished {
            return events;
        }
        self.finished = true;
        if !self.slots.is_empty() {
            while self.next_window < self.received && self.next_window + ((self.window_len - self.slide_len) as u64) < self.received {
                let need = (self.next_window + self.window_len as u64 - self.buffer_origin) as usize;
                if self.buffer.len() < need {
                    self.buffer.resize(need, 0.0);
                }
                self.process_window(&mut events);
            }
        }
        self.flush_pending(f64::INFINITY, &mut events);
        for asm in self.assemblers.values_mut() {
            if let Some(ev) = asm.close() {
                self.diagnostics.push(format!("stream ended inside a frame: {ev}"));
                events.push(ev);
            }
        }
        events
    }

    /// Convenience wrapper: pushes every chunk, then finishes.
    pub fn run<'a>(&mut self, chunks: impl IntoIterator<Item = &'a AudioBuffer>) -> Result<Vec<Event>> {
        let mut events = Vec::new();
        for c in chunks {
            events.extend(self.push(c)?);
        }
        events.extend(self.finish());
        Ok(events)
    }

    fn process_window(&mut self, events: &mut Vec<Event>) {
        let start = self.next_window;
        let window_time = self.time_of(start);
        self.flush_pending(window_time, events);

        let gated = self.config.preamble_id.is_some() && window_time > self.listen_until;
        let active: Vec<usize> = self
            .slots
            .iter()
            .enumerate()
            .filter(|(_, s)| !gated || s.preamble)
            .filter(|(_, s)| self.skip_until.get(&s.id).is_none_or(|&t| window_time >= t))
            .map(|(i, _)| i)
            .collect();

        self.counters.windows += 1;
        if !active.is_empty() {
            let from = (start - self.buffer_origin) as usize;
            let window = &self.buffer[from..from + self.window_len];
            let spectrum = self.correlator.spectrum(window);
            let (correlator, slots, config, window_len) = (&self.correlator, &self.slots, &self.config, self.window_len);
            let found: Vec<(usize, Vec<Peak>)> = active
                .par_iter()
                .map(|&i| {
                    let slot = &slots[i];
                    let corr = correlator.correlate(&spectrum, window_len, &slot.spectrum);
                    let stats = noise_stats(&corr, config.noise_trim_fraction);
                    let peaks = pick_peaks(&corr, &stats, config.threshold_sigmas, slot.radius_samples)
                        .into_iter()
                        .map(|(lag, score)| (lag, score, corr[lag]))
                        .collect();
                    (i, peaks)
                })
                .collect();
            self.counters.correlations += active.len() as u64;
            for (i, peaks) in found {
                for (lag, score, peak) in peaks {
                    let det = RawDetection { id: self.slots[i].id, offset: lag, time: self.time_of(start + lag as u64), score, peak };
                    self.absorb(i, det, events);
                }
            }
        }

        self.next_window += self.slide_len as u64;
        let drop = (self.next_window.min(self.received) - self.buffer_origin) as usize;
        let drop = drop.min(self.buffer.len());
        self.buffer.drain(..drop);
        self.buffer_origin += drop as u64;
    }

    fn absorb(&mut self, slot: usize, det: RawDetection, events: &mut Vec<Event>) {
        let s = &self.slots[slot];
        let (id, radius, preamble, period, symbol_length) = (s.id, s.radius, s.preamble, s.period, s.symbol_length);
        if let Some(p) = self.pending.get_mut(&id) {
            if (det.time - p.time).abs() <= radius {
                if det.peak.abs() > p.peak.abs() {
                    *p = det;
                }
                return;
            }
            let old = self.pending.remove(&id).unwrap();
            self.emit(old, events);
        }
        if preamble {
            self.listen_until = self.listen_until.max(det.time + self.listen_duration);
        }
        if self.config.skip_after_detect {
            if let Some(period) = period {
                self.skip_until.insert(id, det.time + period - symbol_length);
            }
        }
        self.pending.insert(id, det);
    }

    /// Emits every pending cluster that no window starting at `now` or
    /// later can extend, then closes frames that can no longer grow.
    fn flush_pending(&mut self, now: f64, events: &mut Vec<Event>) {
        let radius: BTreeMap<ApplianceId, f64> = self.slots.iter().map(|s| (s.id, s.radius)).collect();
        let mut ready: Vec<RawDetection> = Vec::new();
        self.pending.retain(|id, d| {
            if d.time + radius[id] < now {
                ready.push(d.clone());
                false
            } else {
                true
            }
        });
        ready.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.id.cmp(&b.id)));
        for d in ready {
            self.emit(d, events);
        }
        if now.is_finite() {
            for (id, asm) in self.assemblers.iter_mut() {
                let horizon = now - radius[id];
                if asm.expires_at().is_some_and(|t| t < horizon) {
                    if let Some(ev) = asm.close() {
                        self.diagnostics.push(format!("incomplete frame: {ev}"));
                        events.push(ev);
                    }
                }
            }
        }
    }

    fn emit(&mut self, det: RawDetection, events: &mut Vec<Event>) {
        let hb = Heartbeat { id: det.id, timestamp: det.time, score: det.score };
        events.push(Event::Heartbeat(hb.clone()));
        if let Some(asm) = self.assemblers.get_mut(&det.id) {
            events.extend(asm.push(hb));
        }
    }
}
