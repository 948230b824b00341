use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::Report;
use super::synth::{frame_starts, random_bits, receive, render_scene, score, symbol_audio, trial_seed, Outcome, SceneChannel, Source};
use super::{Experiment, ExperimentSpec};
use crate::acoustics::{add_white_noise, apply_doppler, render_ei, SpikeKernel, Tap, DEFAULT_SOUND_SPEED};
use crate::audio::AudioBuffer;
use crate::detector::{detect_window, DetectorConfig, Event, Receiver, Registry};
use crate::error::{invalid, Result};
use crate::symbolgen::{
    correlate_slices, fixed_pwm_voltage, normalized_alignment, psd_profile, stepped_pwm_voltage, to_bipolar, ApplianceId, MotorProfile,
    VpwmSymbol, DEFAULT_SAMPLE_RATE,
};
use crate::timecode::{optimal_n, FrameCodec};

const N_MAX: u32 = 12;
const DEFAULT_RESOLUTION: f64 = 0.02;
const DECOY_ID: ApplianceId = ApplianceId(0xDEC0);
const PSD_DURATION: f64 = 10.0;
const PSD_SEGMENT: f64 = 0.1;
const CHIRP_STEP: f64 = 0.05;
/// Microphone noise floor under the PSD signals, dB below signal power.
const PSD_FLOOR_DB: f64 = 60.0;

/// Named multipath profiles.
pub(crate) fn scenario_taps(name: &str) -> Result<Vec<Tap>> {
    let taps: &[(f64, f64)] = match name {
        "clean" => &[(0.0, 1.0)],
        "two-tap" => &[(0.0, 1.0), (0.008, 0.6)],
        "moderate" => &[(0.0, 1.0), (0.004, 0.6), (0.012, 0.8)],
        "nlos" => &[(0.0, 0.5), (0.003, 0.8), (0.009, 1.0), (0.022, 0.95), (0.035, 0.7)],
        other => return invalid(format!("unknown multipath scenario {other:?}")),
    };
    Ok(taps.iter().map(|&(d, g)| Tap::new(d, g)).collect())
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('e') {
        format!("{v:.6}")
    } else {
        s
    }
}

fn ids_of(raw: &[u16]) -> Vec<ApplianceId> {
    raw.iter().copied().map(ApplianceId).collect()
}

/// Everything fixed within one grid cell.
struct Cell {
    ids: Vec<ApplianceId>,
    codec: FrameCodec,
    channel: SceneChannel,
    audio: Vec<AudioBuffer>,
    registry: Registry,
    config: DetectorConfig,
}

impl Cell {
    fn new(ids: Vec<ApplianceId>, codec: FrameCodec, duty: f64, channel: SceneChannel, decoy: bool) -> Result<Self> {
        let fs = DEFAULT_SAMPLE_RATE;
        let profile = MotorProfile::default();
        let kernel = SpikeKernel::default();
        let mut registry = Registry::new(fs);
        let mut audio = Vec::with_capacity(ids.len());
        for &id in &ids {
            let symbol = VpwmSymbol::generate(id, codec.symbol_length, &profile)?;
            audio.push(symbol_audio(&symbol, duty, &kernel, fs)?);
            registry.register(id, codec, None)?;
        }
        if decoy && !ids.contains(&DECOY_ID) {
            registry.register(DECOY_ID, codec, None)?;
        }
        Ok(Self { ids, codec, channel, audio, registry, config: DetectorConfig::default() })
    }

    fn symbol_length(&self) -> f64 {
        self.codec.symbol_length
    }

    /// Synthesises and receives one trial.
    fn trial(&self, seed: u64) -> Result<(AudioBuffer, TrialResult)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = self.symbol_length();
        let mut sources = Vec::with_capacity(self.ids.len());
        for (&id, audio) in self.ids.iter().zip(&self.audio) {
            let t0 = 0.5 * l + rng.random::<f64>() * l;
            let bits = random_bits(&mut rng, self.codec.payload_bits());
            let starts = frame_starts(&self.codec, &bits, t0)?;
            sources.push(Source { id, audio: audio.clone(), starts, bits });
        }
        let last = sources.iter().flat_map(|s| s.starts.last().copied().map(|t| t + s.audio.duration())).fold(0.0, f64::max);
        let spread = self.channel.taps.last().map_or(0.0, |t| t.delay);
        let duration = last + l + spread + 6.0 * self.channel.jitter;
        let (track, arrivals) = render_scene(&sources, &self.channel, duration, DEFAULT_SAMPLE_RATE, rng.random())?;
        let events = receive(&track, &self.registry, &self.config)?;
        let tolerance = 0.25 * l;
        let per_id: Vec<Outcome> = sources.iter().zip(&arrivals).map(|(s, a)| score(&events, s.id, a, &s.bits, tolerance)).collect();
        let foreign = events.iter().filter(|e| matches!(e, Event::Heartbeat(h) if !self.ids.contains(&h.id))).count();
        Ok((track, TrialResult { per_id, foreign }))
    }

    fn run(&self, trials: usize, seed: u64, cell: usize) -> Result<CellStats> {
        let results: Vec<TrialResult> =
            (0..trials).into_par_iter().map(|t| self.trial(trial_seed(seed, cell, t)).map(|r| r.1)).collect::<Result<_>>()?;
        Ok(CellStats::collect(self.ids.len(), &results))
    }
}

struct TrialResult {
    per_id: Vec<Outcome>,
    foreign: usize,
}

impl TrialResult {
    fn any_false_alarm(&self) -> bool {
        self.foreign > 0 || self.per_id.iter().any(|o| o.false_alarms > 0)
    }
}

/// Per-source totals over the trials of one cell.
struct CellStats {
    transmitted: Vec<usize>,
    credited: Vec<usize>,
    bits: Vec<usize>,
    bit_errors: Vec<usize>,
    false_alarm_trials: usize,
    foreign: usize,
    trials: usize,
}

impl CellStats {
    fn collect(sources: usize, results: &[TrialResult]) -> Self {
        let mut s = Self {
            transmitted: vec![0; sources],
            credited: vec![0; sources],
            bits: vec![0; sources],
            bit_errors: vec![0; sources],
            false_alarm_trials: 0,
            foreign: 0,
            trials: results.len(),
        };
        for r in results {
            let failed = r.any_false_alarm();
            s.false_alarm_trials += failed as usize;
            s.foreign += r.foreign;
            for (i, o) in r.per_id.iter().enumerate() {
                s.transmitted[i] += o.transmitted;
                if !failed {
                    s.credited[i] += o.detected;
                }
                s.bits[i] += o.bits;
                s.bit_errors[i] += o.bit_errors;
            }
        }
        s
    }

    fn total(v: &[usize]) -> usize {
        v.iter().sum()
    }

    /// Accuracy, BER and false-alarm rows pooled over all sources.
    fn push_pooled(&self, report: &mut Report, params: &[(&str, String)], with_ber: bool) {
        report.push_rate(params, "heartbeat_accuracy", Self::total(&self.credited), Self::total(&self.transmitted));
        if with_ber {
            report.push_rate(params, "ber", Self::total(&self.bit_errors), Self::total(&self.bits));
        }
        report.push_rate(params, "false_alarm_trials", self.false_alarm_trials, self.trials);
    }
}

fn frame_codec(symbol_length: f64, resolution: f64, frame_symbols: u32, fixed_n: Option<u32>) -> Result<FrameCodec> {
    let n = match fixed_n {
        Some(n) => n,
        None => optimal_n(symbol_length, resolution, frame_symbols.max(2), N_MAX)?,
    };
    FrameCodec::new(n, resolution, symbol_length, frame_symbols)
}

/// Runs an experiment to completion.
pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    match spec.name {
        Experiment::BerVsSymbolLength => ber_vs_symbol_length(spec),
        Experiment::BerVsResolution => ber_vs_resolution(spec),
        Experiment::DetectionVsSnr => detection_vs_snr(spec),
        Experiment::Concurrency => concurrency(spec),
        Experiment::DutyMismatch => duty_mismatch(spec),
        Experiment::Mobility => mobility(spec),
        Experiment::Multipath => multipath(spec),
        Experiment::ComfortPsd => comfort_psd(spec),
    }
}

/// Microphone track of the first trial of the first cell.
pub fn example_track(spec: &ExperimentSpec) -> Result<AudioBuffer> {
    spec.validate()?;
    let cells = cells_of(spec)?;
    match cells.first() {
        Some(cell) => Ok(cell.trial(trial_seed(spec.seed, 0, 0))?.0),
        None => {
            let id = ApplianceId(single_ids(spec)[0]);
            let symbol = VpwmSymbol::generate(id, PSD_DURATION, &MotorProfile::default())?;
            symbol_audio(&symbol, 0.5, &SpikeKernel::default(), DEFAULT_SAMPLE_RATE)
        }
    }
}

fn single_ids(spec: &ExperimentSpec) -> Vec<u16> {
    spec.grid.id_sets.as_ref().map_or(vec![7], |s| s[0].clone())
}

fn snrs(spec: &ExperimentSpec, default: &[f64]) -> Vec<f64> {
    spec.grid.snrs_db.clone().unwrap_or_else(|| default.to_vec())
}

fn m_of(spec: &ExperimentSpec) -> u32 {
    spec.grid.frame_symbols.unwrap_or(4)
}

/// The cells of a frame-based experiment, in report order.
fn cells_of(spec: &ExperimentSpec) -> Result<Vec<Cell>> {
    let g = &spec.grid;
    let ids = ids_of(&single_ids(spec));
    let l1 = g.symbol_lengths.as_ref().map_or(1.0, |v| v[0]);
    let jitter = g.jitter.unwrap_or(0.0);
    let mut cells = Vec::new();
    match spec.name {
        Experiment::BerVsSymbolLength => {
            for snr in snrs(spec, &[-20.0]) {
                for &l in g.symbol_lengths.as_deref().unwrap_or(&[0.0625, 0.125, 0.25, 0.5, 1.0, 2.0]) {
                    let codec = frame_codec(l, DEFAULT_RESOLUTION, m_of(spec), g.bits_per_interval)?;
                    let channel = SceneChannel { snr_db: snr, jitter, ..SceneChannel::default() };
                    cells.push(Cell::new(ids.clone(), codec, 0.5, channel, false)?);
                }
            }
        }
        Experiment::BerVsResolution => {
            for snr in snrs(spec, &[0.0]) {
                for &d in g.resolutions.as_deref().unwrap_or(&[0.0025, 0.005, 0.01, 0.02, 0.04]) {
                    let codec = frame_codec(l1, d, m_of(spec), g.bits_per_interval)?;
                    let channel = SceneChannel { snr_db: snr, jitter: g.jitter.unwrap_or(0.003), ..SceneChannel::default() };
                    cells.push(Cell::new(ids.clone(), codec, 0.5, channel, false)?);
                }
            }
        }
        Experiment::DetectionVsSnr => {
            for snr in snrs(spec, &[20.0, 10.0, 0.0, -5.0, -10.0, -15.0]) {
                for &l in g.symbol_lengths.as_deref().unwrap_or(&[0.25, 0.5, 1.0, 2.0]) {
                    let codec = frame_codec(l, DEFAULT_RESOLUTION, 1, Some(1))?;
                    let channel = SceneChannel { snr_db: snr, jitter, ..SceneChannel::default() };
                    cells.push(Cell::new(ids.clone(), codec, 0.5, channel, false)?);
                }
            }
        }
        Experiment::Concurrency => {
            let sets = g.id_sets.clone().unwrap_or_else(|| vec![vec![3, 6, 8]]);
            for snr in snrs(spec, &[-5.0]) {
                for set in &sets {
                    let codec = frame_codec(l1, DEFAULT_RESOLUTION, m_of(spec), g.bits_per_interval)?;
                    let channel = SceneChannel { snr_db: snr, jitter, ..SceneChannel::default() };
                    cells.push(Cell::new(ids_of(set), codec, 0.5, channel, true)?);
                }
            }
        }
        Experiment::DutyMismatch => {
            for snr in snrs(spec, &[0.0]) {
                for &duty in g.duties.as_deref().unwrap_or(&[0.1, 0.2, 0.3, 0.4, 0.5]) {
                    let codec = frame_codec(l1, DEFAULT_RESOLUTION, 1, Some(1))?;
                    let channel = SceneChannel { snr_db: snr, jitter, ..SceneChannel::default() };
                    cells.push(Cell::new(ids.clone(), codec, duty, channel, false)?);
                }
            }
        }
        Experiment::Mobility => {
            for snr in snrs(spec, &[0.0]) {
                for &speed in g.speeds.as_deref().unwrap_or(&[0.0, 0.2, 1.0, 2.0]) {
                    let codec = frame_codec(l1, DEFAULT_RESOLUTION, m_of(spec), g.bits_per_interval)?;
                    let channel = SceneChannel { snr_db: snr, speed, jitter, ..SceneChannel::default() };
                    cells.push(Cell::new(ids.clone(), codec, 0.5, channel, false)?);
                }
            }
        }
        Experiment::Multipath => {
            let names = g.scenarios.clone().unwrap_or_else(|| ["clean", "moderate", "nlos"].map(String::from).to_vec());
            for snr in snrs(spec, &[-18.0]) {
                for name in &names {
                    let codec = frame_codec(l1, DEFAULT_RESOLUTION, m_of(spec), g.bits_per_interval)?;
                    let channel = SceneChannel { snr_db: snr, taps: scenario_taps(name)?, jitter, ..SceneChannel::default() };
                    cells.push(Cell::new(ids.clone(), codec, 0.5, channel, false)?);
                }
            }
        }
        Experiment::ComfortPsd => {}
    }
    Ok(cells)
}

fn run_cells(spec: &ExperimentSpec, cells: &[Cell]) -> Result<Vec<CellStats>> {
    cells.iter().enumerate().map(|(i, c)| c.run(spec.trials, spec.seed, i)).collect()
}

fn ber_vs_symbol_length(spec: &ExperimentSpec) -> Result<Report> {
    let cells = cells_of(spec)?;
    let stats = run_cells(spec, &cells)?;
    let mut report = Report::new(spec.name.name(), spec.seed, spec.trials);
    for (cell, st) in cells.iter().zip(&stats) {
        let params = [
            ("snr_db", fmt_num(cell.channel.snr_db)),
            ("symbol_length", fmt_num(cell.symbol_length())),
            ("bits_per_interval", cell.codec.bits_per_interval.to_string()),
        ];
        st.push_pooled(&mut report, &params, true);
        report.push(&params, "throughput_bps", cell.codec.data_rate(), None);
    }
    Ok(report)
}

fn ber_vs_resolution(spec: &ExperimentSpec) -> Result<Report> {
    let cells = cells_of(spec)?;
    let stats = run_cells(spec, &cells)?;
    let mut report = Report::new(spec.name.name(), spec.seed, spec.trials);
    for (cell, st) in cells.iter().zip(&stats) {
        let params = [
            ("snr_db", fmt_num(cell.channel.snr_db)),
            ("jitter", fmt_num(cell.channel.jitter)),
            ("resolution", fmt_num(cell.codec.resolution)),
            ("bits_per_interval", cell.codec.bits_per_interval.to_string()),
        ];
        st.push_pooled(&mut report, &params, true);
        report.push(&params, "throughput_bps", cell.codec.data_rate(), None);
    }
    Ok(report)
}

/// Fraction of pure-noise windows in which the detector fires.
fn window_false_alarms(cell: &Cell, trials: usize, seed: u64, index: usize) -> Result<usize> {
    let rx = Receiver::new(&cell.registry, cell.config.clone())?;
    let (window_len, _) = rx.window_geometry();
    let silence = AudioBuffer::zeros(window_len, DEFAULT_SAMPLE_RATE)?;
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let noise = add_white_noise(&silence, 1.0, trial_seed(seed ^ 0x5EED, index, t))?;
            Ok(!detect_window(&noise, &cell.registry, &cell.config)?.detections.is_empty())
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().filter(|&h| h).count())
}

fn detection_vs_snr(spec: &ExperimentSpec) -> Result<Report> {
    let cells = cells_of(spec)?;
    let stats = run_cells(spec, &cells)?;
    let mut report = Report::new(spec.name.name(), spec.seed, spec.trials);
    for (i, (cell, st)) in cells.iter().zip(&stats).enumerate() {
        let params = [("snr_db", fmt_num(cell.channel.snr_db)), ("symbol_length", fmt_num(cell.symbol_length()))];
        st.push_pooled(&mut report, &params, false);
        let fa = window_false_alarms(cell, spec.trials, spec.seed, i)?;
        report.push_rate(&params, "window_false_alarm_rate", fa, spec.trials);
    }
    Ok(report)
}

fn concurrency(spec: &ExperimentSpec) -> Result<Report> {
    let cells = cells_of(spec)?;
    let stats = run_cells(spec, &cells)?;
    let mut report = Report::new(spec.name.name(), spec.seed, spec.trials);
    for (cell, st) in cells.iter().zip(&stats) {
        let set = cell.ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("+");
        for (k, id) in cell.ids.iter().enumerate() {
            let params = [("snr_db", fmt_num(cell.channel.snr_db)), ("ids", set.clone()), ("id", id.to_string())];
            report.push_rate(&params, "heartbeat_accuracy", st.credited[k], st.transmitted[k]);
            report.push_rate(&params, "ber", st.bit_errors[k], st.bits[k]);
        }
        let params = [("snr_db", fmt_num(cell.channel.snr_db)), ("ids", set.clone())];
        report.push_rate(&params, "false_alarm_trials", st.false_alarm_trials, st.trials);
        report.push(&params, "decoy_heartbeats", st.foreign as f64, None);
    }
    Ok(report)
}

/// Aligned correlation between the `duty` waveform and the template, both
/// bipolar, normalised by their energies.
pub(crate) fn duty_alignment(id: ApplianceId, symbol_length: f64, duty: f64) -> Result<f64> {
    let symbol = VpwmSymbol::generate(id, symbol_length, &MotorProfile::default())?;
    let template = symbol.normalize_template(DEFAULT_SAMPLE_RATE)?;
    let v = symbol.with_duty(duty)?.render_voltage(&[], DEFAULT_SAMPLE_RATE)?;
    normalized_alignment(&to_bipolar(&v), &template)
}

fn duty_mismatch(spec: &ExperimentSpec) -> Result<Report> {
    let cells = cells_of(spec)?;
    let stats = run_cells(spec, &cells)?;
    let duties = spec.grid.duties.clone().unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.4, 0.5]);
    let mut report = Report::new(spec.name.name(), spec.seed, spec.trials);
    for (k, (cell, st)) in cells.iter().zip(&stats).enumerate() {
        let duty = duties[k % duties.len()];
        let params = [("snr_db", fmt_num(cell.channel.snr_db)), ("duty", fmt_num(duty))];
        st.push_pooled(&mut report, &params, false);
        report.push(&params, "normalized_correlation", duty_alignment(cell.ids[0], cell.symbol_length(), duty)?, None);
        report.push(&params, "duty_law", 1.0 - 2.0 * (duty - 0.5).abs(), None);
    }
    Ok(report)
}

/// Peak |correlation| between a moving source's symbol and the template,
/// relative to the static peak.
fn doppler_peak_ratio(cell: &Cell, speed: f64) -> Result<f64> {
    let audio = &cell.audio[0];
    let template = &cell.registry.get(cell.ids[0]).expect("registered").template;
    let pad = template.len() / 4;
    let mut padded = vec![0.0; pad];
    padded.extend_from_slice(audio.samples());
    padded.extend(std::iter::repeat_n(0.0, 2 * pad));
    let peak = |x: &[f64]| correlate_slices(x, template.samples()).iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let base = peak(&padded);
    let moved = apply_doppler(&AudioBuffer::from_parts(padded, DEFAULT_SAMPLE_RATE, 0.0), speed, DEFAULT_SOUND_SPEED)?;
    Ok(peak(moved.samples()) / base)
}

fn mobility(spec: &ExperimentSpec) -> Result<Report> {
    let cells = cells_of(spec)?;
    let stats = run_cells(spec, &cells)?;
    let mut report = Report::new(spec.name.name(), spec.seed, spec.trials);
    for (cell, st) in cells.iter().zip(&stats) {
        let params = [("snr_db", fmt_num(cell.channel.snr_db)), ("speed", fmt_num(cell.channel.speed))];
        st.push_pooled(&mut report, &params, true);
        report.push(&params, "peak_ratio", doppler_peak_ratio(cell, cell.channel.speed)?, None);
    }
    Ok(report)
}

fn multipath(spec: &ExperimentSpec) -> Result<Report> {
    let cells = cells_of(spec)?;
    let stats = run_cells(spec, &cells)?;
    let names = spec.grid.scenarios.clone().unwrap_or_else(|| ["clean", "moderate", "nlos"].map(String::from).to_vec());
    let mut report = Report::new(spec.name.name(), spec.seed, spec.trials);
    for (k, (cell, st)) in cells.iter().zip(&stats).enumerate() {
        let params = [("snr_db", fmt_num(cell.channel.snr_db)), ("scenario", names[k % names.len()].clone())];
        st.push_pooled(&mut report, &params, true);
    }
    Ok(report)
}

/// Switching periods of the stepped-chirp reference: the switching
/// frequency climbs from 500 Hz to 2 kHz in 50 ms steps, then restarts.
pub(crate) fn chirp_segments(duration: f64) -> Vec<(f64, f64)> {
    let steps_per_sweep = 20;
    let steps = (duration / CHIRP_STEP).round() as usize;
    (0..steps)
        .map(|k| {
            let f = 500.0 + 1500.0 * (k % steps_per_sweep) as f64 / (steps_per_sweep - 1) as f64;
            (CHIRP_STEP, 1.0 / f)
        })
        .collect()
}

fn comfort_psd(spec: &ExperimentSpec) -> Result<Report> {
    let fs = DEFAULT_SAMPLE_RATE;
    let kernel = SpikeKernel::default();
    let profile = MotorProfile::default();
    let id = ApplianceId(single_ids(spec)[0]);
    let duty = spec.grid.duties.as_ref().map_or(0.5, |d| d[0]);
    let fixed = render_ei(&fixed_pwm_voltage(profile.mean_switch_period(), duty, PSD_DURATION, fs)?, &kernel)?;
    let symbol = VpwmSymbol::generate(id, PSD_DURATION, &profile)?;
    let vpwm = symbol_audio(&symbol, duty, &kernel, fs)?;
    let chirp = render_ei(&stepped_pwm_voltage(&chirp_segments(PSD_DURATION), duty, fs)?, &kernel)?;
    let noise = add_white_noise(&AudioBuffer::zeros(fixed.len(), fs)?, 1.0, spec.seed)?;

    let mut report = Report::new(spec.name.name(), spec.seed, spec.trials);
    let mut prominence = Vec::new();
    for (k, (name, audio)) in [("fixed", &fixed), ("vpwm", &vpwm), ("chirp", &chirp), ("noise", &noise)].into_iter().enumerate() {
        let floored = if name == "noise" {
            audio.clone()
        } else {
            add_white_noise(audio, audio.power() * 10f64.powf(-PSD_FLOOR_DB / 10.0), spec.seed.wrapping_add(k as u64 + 1))?
        };
        let psd = psd_profile(&floored, PSD_SEGMENT)?;
        let params = [("modulation", name.to_string()), ("duty", fmt_num(duty))];
        report.push(&params, "tonal_prominence_db", psd.tonal_prominence_db(), None);
        report.push(&params, "spectral_flatness", psd.spectral_flatness(), None);
        prominence.push(psd.tonal_prominence_db());
    }
    let mut peaks: Vec<f64> = Vec::new();
    let step = (CHIRP_STEP * fs as f64).round() as usize;
    for k in 0..20 {
        let seg = chirp.slice(k * step, (k + 1) * step);
        peaks.push(psd_profile(&seg, CHIRP_STEP)?.peak_frequency());
    }
    let rising = peaks.windows(2).filter(|w| w[1] > w[0]).count();
    let mut distinct = peaks.clone();
    distinct.dedup();
    let params = [("modulation", "chirp".to_string()), ("duty", fmt_num(duty))];
    report.push(&params, "distinct_peak_frequencies", distinct.len() as f64, None);
    report.push(&params, "rising_steps", rising as f64 / (peaks.len() - 1) as f64, None);
    let params = [("modulation", "fixed-minus-vpwm".to_string()), ("duty", fmt_num(duty))];
    report.push(&params, "prominence_margin_db", prominence[0] - prominence[1], None);
    Ok(report)
}
