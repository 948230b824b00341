use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::acoustics::{add_white_noise, apply_doppler, apply_multipath, doppler_factor, render_ei, SpikeKernel, Tap, DEFAULT_SOUND_SPEED};
use crate::audio::AudioBuffer;
use crate::detector::{DetectorConfig, Event, Receiver, Registry};
use crate::error::Result;
use crate::symbolgen::{ApplianceId, SplitMix64, VpwmSymbol};
use crate::timecode::FrameCodec;

/// Independent seed for trial `trial` of grid cell `cell`.
pub fn trial_seed(seed: u64, cell: usize, trial: usize) -> u64 {
    SplitMix64::new(seed ^ ((cell as u64) << 40) ^ trial as u64).next_u64()
}

/// Unit-peak sound of one symbol at the given duty cycle.
pub fn symbol_audio(symbol: &VpwmSymbol, duty: f64, kernel: &SpikeKernel, sample_rate: u32) -> Result<AudioBuffer> {
    let voltage = symbol.clone().with_duty(duty)?.render_voltage(&[], sample_rate)?;
    render_ei(&voltage, kernel)
}

/// One appliance in a simulated scene.
#[derive(Debug, Clone)]
pub struct Source {
    pub id: ApplianceId,
    pub audio: AudioBuffer,
    /// Emission times of each symbol copy, in transmitter time.
    pub starts: Vec<f64>,
    /// Payload carried by the frame, if any.
    pub bits: Vec<bool>,
}

/// Channel applied to every source of a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneChannel {
    /// Symbol power over noise power, in dB.
    pub snr_db: f64,
    pub taps: Vec<Tap>,
    pub speed: f64,
    /// Standard deviation of per-symbol emission jitter, in seconds.
    pub jitter: f64,
}

impl Default for SceneChannel {
    fn default() -> Self {
        Self { snr_db: f64::INFINITY, taps: vec![Tap::new(0.0, 1.0)], speed: 0.0, jitter: 0.0 }
    }
}

/// Random payload of `n` bits.
pub fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random::<bool>()).collect()
}

/// Frame of `bits` starting at `t0`, with the symbol start times returned.
pub fn frame_starts(codec: &FrameCodec, bits: &[bool], t0: f64) -> Result<Vec<f64>> {
    let mut starts = vec![t0];
    for iv in codec.encode_intervals(bits)? {
        starts.push(starts.last().unwrap() + iv);
    }
    Ok(starts)
}

/// Renders all sources through the channel into one microphone track of
/// `duration` seconds. Returns the track and, per source, the true
/// arrival times of each symbol on the receiver timeline.
pub fn render_scene(
    sources: &[Source],
    channel: &SceneChannel,
    duration: f64,
    sample_rate: u32,
    seed: u64,
) -> Result<(AudioBuffer, Vec<Vec<f64>>)> {
    let fs = sample_rate as f64;
    let len = (duration * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, channel.jitter.max(0.0)).expect("finite jitter");
    let factor = doppler_factor(channel.speed, DEFAULT_SOUND_SPEED);
    let mut mix = vec![0.0; len];
    let mut arrivals = Vec::with_capacity(sources.len());
    let mut symbol_power: f64 = 0.0;
    for src in sources {
        symbol_power = symbol_power.max(src.audio.power());
        let mut track = vec![0.0; len];
        let mut times = Vec::with_capacity(src.starts.len());
        for &t in &src.starts {
            let t = if channel.jitter > 0.0 { t + jitter.sample(&mut rng) } else { t };
            let at = (t * fs).round().max(0.0) as usize;
            if at < len {
                for (o, &s) in track[at..].iter_mut().zip(src.audio.samples()) {
                    *o += s;
                }
            }
            times.push(at as f64 / fs / factor);
        }
        let moved = apply_doppler(&AudioBuffer::from_parts(track, sample_rate, 0.0), channel.speed, DEFAULT_SOUND_SPEED)?;
        let spread = apply_multipath(&moved, &channel.taps)?;
        for (o, &s) in mix.iter_mut().zip(spread.samples()) {
            *o += s;
        }
        arrivals.push(times);
    }
    let clean = AudioBuffer::from_parts(mix, sample_rate, 0.0);
    let out = if channel.snr_db.is_finite() && symbol_power > 0.0 {
        add_white_noise(&clean, symbol_power / 10f64.powf(channel.snr_db / 10.0), rng.random())?
    } else {
        clean
    };
    Ok((out, arrivals))
}

/// Runs the streaming receiver over a complete track, in one-second chunks.
pub fn receive(track: &AudioBuffer, registry: &Registry, config: &DetectorConfig) -> Result<Vec<Event>> {
    let mut rx = Receiver::new(registry, config.clone())?;
    let chunk = track.sample_rate() as usize;
    let mut events = Vec::new();
    let mut from = 0;
    while from < track.len() {
        let to = (from + chunk).min(track.len());
        events.extend(rx.push(&track.slice(from, to))?);
        from = to;
    }
    events.extend(rx.finish());
    Ok(events)
}

/// Per-source scoring of one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Outcome {
    pub transmitted: usize,
    pub detected: usize,
    pub false_alarms: usize,
    pub bits: usize,
    pub bit_errors: usize,
}

/// Matches heartbeats of `id` to true arrivals within `tolerance` seconds
/// and compares the first decoded message against `bits`. A frame that
/// was not decoded counts every bit as wrong.
pub fn score(events: &[Event], id: ApplianceId, arrivals: &[f64], bits: &[bool], tolerance: f64) -> Outcome {
    let mut used = vec![false; arrivals.len()];
    let mut out = Outcome { transmitted: arrivals.len(), bits: bits.len(), ..Outcome::default() };
    for ev in events {
        if let Event::Heartbeat(hb) = ev {
            if hb.id != id {
                continue;
            }
            let hit = arrivals
                .iter()
                .enumerate()
                .filter(|&(i, &t)| !used[i] && (hb.timestamp - t).abs() <= tolerance)
                .min_by(|a, b| (hb.timestamp - a.1).abs().total_cmp(&(hb.timestamp - b.1).abs()))
                .map(|(i, _)| i);
            match hit {
                Some(i) => {
                    used[i] = true;
                    out.detected += 1;
                }
                None => out.false_alarms += 1,
            }
        }
    }
    if !bits.is_empty() {
        let first = arrivals.first().copied().unwrap_or(0.0);
        let msg = events
            .iter()
            .filter_map(|e| match e {
                Event::Message(m) if m.id == id && (m.timestamp - first).abs() <= tolerance => Some(m),
                _ => None,
            })
            .next();
        out.bit_errors = match msg {
            Some(m) => m.bits.iter().zip(bits).filter(|(a, b)| a != b).count() + bits.len().saturating_sub(m.bits.len()),
            None => bits.len(),
        };
    }
    out
}

/// Registry holding the given appliances with default motor profile.
pub fn registry_for(ids: &[ApplianceId], codec: FrameCodec, sample_rate: u32) -> Result<Registry> {
    let mut reg = Registry::new(sample_rate);
    for &id in ids {
        reg.register(id, codec, None)?;
    }
    Ok(reg)
}
