mod common;

use common::{noisy, sound, track, FS};
use motorbeat::detector::{detect_window, extract_cir, DetectorConfig, Event, Receiver, Registry};
use motorbeat::symbolgen::ApplianceId;
use motorbeat::timecode::{parse_bits, FrameCodec};
use motorbeat::AudioBuffer;

fn codec(l: f64) -> FrameCodec {
    FrameCodec::new(3, 0.02, l, 4).unwrap()
}

fn registry(ids: &[u16], l: f64) -> Registry {
    let mut reg = Registry::new(FS);
    for &id in ids {
        reg.register(ApplianceId(id), codec(l), None).unwrap();
    }
    reg
}

fn heartbeats(events: &[Event]) -> Vec<(u16, f64)> {
    events
        .iter()
        .filter_map(|e| match e {
            Event::Heartbeat(h) => Some((h.id.value(), h.timestamp)),
            _ => None,
        })
        .collect()
}

fn messages(events: &[Event]) -> Vec<(u16, String)> {
    events
        .iter()
        .filter_map(|e| match e {
            Event::Message(m) => Some((m.id.value(), m.bit_string())),
            _ => None,
        })
        .collect()
}

fn receive(reg: &Registry, config: DetectorConfig, audio: &AudioBuffer, chunk: usize) -> (Vec<Event>, Receiver) {
    let mut rx = Receiver::new(reg, config).unwrap();
    let mut events = Vec::new();
    for from in (0..audio.len()).step_by(chunk) {
        events.extend(rx.push(&audio.slice(from, (from + chunk).min(audio.len()))).unwrap());
    }
    events.extend(rx.finish());
    (events, rx)
}

/// Symbol starts of a frame carrying `bits`.
fn frame(codec: &FrameCodec, bits: &str, t0: f64) -> Vec<f64> {
    let mut t = vec![t0];
    for iv in codec.encode_intervals(&parse_bits(bits).unwrap()).unwrap() {
        t.push(t.last().unwrap() + iv);
    }
    t
}

#[test]
fn matched_window_detects_insertion_offset() {
    let s = sound(7, 0.5);
    let window = track(0.75, &[(&s, 0.1)]);
    let reg = registry(&[7], 0.5);
    let found = detect_window(&window, &reg, &DetectorConfig::default()).unwrap();
    assert_eq!(found.detections.len(), 1);
    assert_eq!(found.detections[0].offset, 2400);
    assert!(found.detections[0].score > 20.0);
}

#[test]
fn only_the_transmitting_id_fires() {
    let s = sound(3, 1.0);
    let window = noisy(&track(1.3, &[(&s, 0.2)]), &s, -5.0, 1);
    let reg = registry(&[3, 6, 8], 1.0);
    let found = detect_window(&window, &reg, &DetectorConfig::default()).unwrap();
    let ids: Vec<u16> = found.detections.iter().map(|d| d.id.value()).collect();
    assert_eq!(ids, vec![3]);
}

#[test]
fn short_window_skips_template() {
    let reg = registry(&[1], 1.0);
    let window = AudioBuffer::zeros(1000, FS).unwrap();
    let found = detect_window(&window, &reg, &DetectorConfig::default()).unwrap();
    assert!(found.detections.is_empty());
    assert_eq!(found.skipped, vec![ApplianceId(1)]);
}

#[test]
fn noise_windows_rarely_fire() {
    let reg = registry(&[11], 0.5);
    let silence = AudioBuffer::zeros((0.75 * FS as f64) as usize, FS).unwrap();
    let fired = (0..200)
        .filter(|&seed| {
            let w = motorbeat::acoustics::add_white_noise(&silence, 1.0, seed).unwrap();
            !detect_window(&w, &reg, &DetectorConfig::default()).unwrap().detections.is_empty()
        })
        .count();
    assert!(fired <= 2, "{fired} of 200 noise windows fired");
}

#[test]
fn one_symbol_gives_one_heartbeat() {
    let s = sound(5, 1.0);
    let audio = noisy(&track(4.0, &[(&s, 1.1)]), &s, 0.0, 2);
    let (events, rx) = receive(&registry(&[5], 1.0), DetectorConfig::default(), &audio, 4096);
    let hb = heartbeats(&events);
    assert_eq!(hb.len(), 1, "{events:?}");
    assert!((hb[0].1 - 1.1).abs() < 1e-3);
    assert!(rx.counters().windows > 4);
}

#[test]
fn periodic_beats_are_spaced_by_the_period() {
    let s = sound(9, 1.0);
    let starts: Vec<f64> = (0..6).map(|k| 0.5 + 10.0 * k as f64).collect();
    let parts: Vec<_> = starts.iter().map(|&t| (&s, t)).collect();
    let audio = noisy(&track(62.0, &parts), &s, -10.0, 3);
    let mut reg = Registry::new(FS);
    reg.register(ApplianceId(9), codec(1.0), Some(10.0)).unwrap();
    for skip in [false, true] {
        let config = DetectorConfig { skip_after_detect: skip, ..DetectorConfig::default() };
        let (events, rx) = receive(&reg, config, &audio, FS as usize);
        let hb = heartbeats(&events);
        assert_eq!(hb.len(), 6, "skip={skip}: {hb:?}");
        for w in hb.windows(2) {
            assert!((w[1].1 - w[0].1 - 10.0).abs() <= 0.01);
        }
        assert!(messages(&events).is_empty());
        if skip {
            assert!(rx.counters().correlations < rx.counters().windows / 2);
        }
    }
}

#[test]
fn empty_stream_is_silent() {
    let mut rx = Receiver::new(&registry(&[1], 1.0), DetectorConfig::default()).unwrap();
    assert!(rx.finish().is_empty());
    assert_eq!(rx.counters().windows, 0);
}

#[test]
fn out_of_order_chunks_are_rejected() {
    let mut rx = Receiver::new(&registry(&[1], 0.25), DetectorConfig::default()).unwrap();
    rx.push(&AudioBuffer::with_start(vec![0.0; 2400], FS, 1.0).unwrap()).unwrap();
    let early = AudioBuffer::with_start(vec![0.0; 100], FS, 1.05).unwrap();
    assert!(rx.push(&early).is_err());
    let wrong_rate = AudioBuffer::with_start(vec![0.0; 100], 48_000, 2.0).unwrap();
    assert!(rx.push(&wrong_rate).is_err());
    let later = AudioBuffer::with_start(vec![0.0; 100], FS, 1.5).unwrap();
    rx.push(&later).unwrap();
    assert_eq!(rx.diagnostics().len(), 1);
}

#[test]
fn chunking_does_not_change_events() {
    let s = sound(4, 0.5);
    let audio = noisy(&track(6.0, &[(&s, 0.3), (&s, 2.2), (&s, 4.9)]), &s, -5.0, 4);
    let reg = registry(&[4, 12], 0.5);
    let (whole, _) = receive(&reg, DetectorConfig::default(), &audio, audio.len());
    for chunk in [333, 777, 12_000] {
        let (parts, _) = receive(&reg, DetectorConfig::default(), &audio, chunk);
        assert_eq!(parts, whole, "chunk {chunk}");
    }
    assert_eq!(heartbeats(&whole).len(), 3);
}

#[test]
fn frame_decodes_to_its_payload() {
    let c = codec(1.0);
    let s = sound(21, 1.0);
    let starts = frame(&c, "100011111", 0.7);
    assert!((starts[3] - 0.7 - 4.03).abs() < 1e-9);
    let parts: Vec<_> = starts.iter().map(|&t| (&s, t)).collect();
    let audio = noisy(&track(7.0, &parts), &s, -10.0, 5);
    let reg = registry(&[21], 1.0);
    let (events, _) = receive(&reg, DetectorConfig::default(), &audio, 8192);
    assert_eq!(messages(&events), vec![(21, "100011111".to_string())]);
    let line = events.iter().find(|e| matches!(e, Event::Message(_))).unwrap().to_string();
    assert_eq!(line, "MSG,21,0.700000,11f");
}

#[test]
fn constant_timing_bias_leaves_bits_unchanged() {
    let c = codec(1.0);
    let s = sound(22, 1.0);
    let starts = frame(&c, "010110001", 0.5);
    let audio = track(7.5, &starts.iter().map(|&t| (&s, t)).collect::<Vec<_>>());
    let mut reg = Registry::new(FS);
    let template =
        motorbeat::symbolgen::VpwmSymbol::generate(ApplianceId(22), 1.0, &Default::default()).unwrap().normalize_template(FS).unwrap();
    // Template missing its first 7 ms: every peak shifts by the same amount.
    let cut = (0.007 * FS as f64) as usize;
    reg.insert_template(ApplianceId(22), template.slice(cut, template.len()), c, None).unwrap();
    let (events, _) = receive(&reg, DetectorConfig::default(), &audio, FS as usize);
    assert_eq!(messages(&events), vec![(22, "010110001".to_string())]);
    let hb = heartbeats(&events);
    assert!((hb[0].1 - 0.507).abs() < 1e-3);
}

#[test]
fn truncated_frame_is_partial() {
    let c = codec(1.0);
    let s = sound(23, 1.0);
    let starts = frame(&c, "000000000", 0.5);
    let audio = track(6.0, &starts[..3].iter().map(|&t| (&s, t)).collect::<Vec<_>>());
    let (events, rx) = receive(&registry(&[23], 1.0), DetectorConfig::default(), &audio, FS as usize);
    assert!(messages(&events).is_empty(), "{events:?}");
    let partial: Vec<String> = events.iter().filter(|e| matches!(e, Event::Partial(_))).map(|e| e.to_string()).collect();
    assert_eq!(partial, vec!["PART,23,0.500000,3".to_string()]);
    assert!(!rx.diagnostics().is_empty());
}

#[test]
fn concurrent_frames_decode_independently() {
    let c = codec(1.0);
    let payloads = [(3u16, "101010101", 0.5), (6, "111000111", 0.8), (8, "000111000", 1.3)];
    let sounds: Vec<_> = payloads.iter().map(|p| sound(p.0, 1.0)).collect();
    let mut parts = Vec::new();
    for (s, p) in sounds.iter().zip(&payloads) {
        for t in frame(&c, p.1, p.2) {
            parts.push((s, t));
        }
    }
    let audio = noisy(&track(8.0, &parts), &sounds[0], -5.0, 6);
    let (events, _) = receive(&registry(&[3, 6, 8], 1.0), DetectorConfig::default(), &audio, FS as usize);
    let mut got = messages(&events);
    got.sort();
    let want: Vec<(u16, String)> = payloads.iter().map(|p| (p.0, p.1.to_string())).collect();
    assert_eq!(got, want);
    assert_eq!(heartbeats(&events).len(), 12);
}

fn preamble_scene(frames: &[(f64, &str)]) -> AudioBuffer {
    let c = codec(1.0);
    let pre = sound(100, 1.0);
    let data = sound(31, 1.0);
    let mut parts = Vec::new();
    for &(t, bits) in frames {
        parts.push((&pre, t));
        for s in frame(&c, bits, t + 1.5) {
            parts.push((&data, s));
        }
    }
    let end = frames.last().map_or(4.0, |f| f.0 + 8.0);
    noisy(&track(end, &parts), &data, -5.0, 7)
}

#[test]
fn preamble_gating_matches_ungated_decoding() {
    let reg = registry(&[31, 32, 33, 100], 1.0);
    let audio = preamble_scene(&[(0.5, "110100101")]);
    let (plain, rx_plain) = receive(&reg, DetectorConfig::default(), &audio, FS as usize);
    let gated_cfg = DetectorConfig { preamble_id: Some(ApplianceId(100)), ..DetectorConfig::default() };
    let (gated, rx_gated) = receive(&reg, gated_cfg, &audio, FS as usize);
    let want = vec![(31, "110100101".to_string())];
    assert_eq!(messages(&plain), want);
    assert_eq!(messages(&gated), want);
    assert!(rx_gated.counters().correlations < rx_plain.counters().correlations);
}

#[test]
fn back_to_back_preambled_frames() {
    let reg = registry(&[31, 100], 1.0);
    let audio = preamble_scene(&[(0.5, "000000111"), (9.0, "111111000")]);
    let cfg = DetectorConfig { preamble_id: Some(ApplianceId(100)), ..DetectorConfig::default() };
    let (events, _) = receive(&reg, cfg, &audio, FS as usize);
    assert_eq!(messages(&events), vec![(31, "000000111".to_string()), (31, "111111000".to_string())]);
}

#[test]
fn idle_gate_runs_only_the_preamble() {
    let reg = registry(&[31, 32, 33, 100], 1.0);
    let s = sound(32, 1.0);
    let audio = noisy(&track(10.0, &[(&s, 2.0)]), &s, 0.0, 8);
    let cfg = DetectorConfig { preamble_id: Some(ApplianceId(100)), ..DetectorConfig::default() };
    let (events, rx) = receive(&reg, cfg, &audio, FS as usize);
    assert!(heartbeats(&events).is_empty());
    assert_eq!(rx.counters().correlations, rx.counters().windows);
}

#[test]
fn unknown_preamble_is_rejected() {
    let cfg = DetectorConfig { preamble_id: Some(ApplianceId(999)), ..DetectorConfig::default() };
    assert!(Receiver::new(&registry(&[1], 1.0), cfg).is_err());
}

#[test]
fn cir_of_identity_channel_is_a_single_lobe() {
    let s = sound(40, 1.0);
    let audio = track(1.5, &[(&s, 0.2)]);
    let template =
        motorbeat::symbolgen::VpwmSymbol::generate(ApplianceId(40), 1.0, &Default::default()).unwrap().normalize_template(FS).unwrap();
    let cir = extract_cir(&audio, &template, 0.02, &DetectorConfig::default()).unwrap();
    assert_eq!(cir.peak_offset, 4800);
    assert_eq!(cir.lags.len(), cir.amplitudes.len());
    let centre = cir.lags.iter().position(|&l| l == 0).unwrap();
    assert_eq!(cir.amplitudes[centre], 1.0);
    let (_, second) = cir.secondary_peak(48).unwrap();
    assert!(second.abs() < 0.3, "{second}");

    let noise = motorbeat::acoustics::add_white_noise(&AudioBuffer::zeros(audio.len(), FS).unwrap(), 1.0, 9).unwrap();
    let empty = extract_cir(&noise, &template, 0.02, &DetectorConfig::default()).unwrap();
    assert!(empty.is_empty());
    assert!(empty.diagnostic.is_some());
}

#[test]
fn registry_file_round_trip() {
    let text = r#"
sample_rate = 24000

[[appliance]]
id = 3
symbol_length = 0.5
bits_per_interval = 2

[[appliance]]
id = 100
symbol_length = 1.0
heartbeat_period = 30.0
"#;
    let reg = Registry::from_toml_str(text).unwrap();
    assert_eq!(reg.len(), 2);
    assert_eq!(reg.get(ApplianceId(3)).unwrap().codec.bits_per_interval, 2);
    assert_eq!(reg.get(ApplianceId(100)).unwrap().heartbeat_period, Some(30.0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("registry.toml");
    std::fs::write(&path, text).unwrap();
    assert_eq!(Registry::load(&path).unwrap().len(), 2);
    assert!(Registry::from_toml_str("[[appliance]]\nid = 1\nsymbol_length = 1.0\ncolour = 2\n").is_err());
}
