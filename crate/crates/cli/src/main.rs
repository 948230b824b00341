use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use motorbeat::acoustics::wav::{read_wav, read_wav_bytes, write_wav, WavFormat};
use motorbeat::acoustics::SpikeKernel;
use motorbeat::bench::synth::{render_scene, symbol_audio, SceneChannel, Source};
use motorbeat::bench::{self, Experiment, ExperimentSpec, Grid, Report};
use motorbeat::detector::RegistryFile;
use motorbeat::symbolgen::{SplitMix64, DEFAULT_SAMPLE_RATE};
use motorbeat::timecode::{bits_to_hex, optimal_codec, parse_bits};
use motorbeat::{ApplianceId, AudioBuffer, DetectorConfig, Event, FrameCodec, MotorProfile, Receiver, Registry, VpwmSymbol};

const N_MAX: u32 = 12;

#[derive(Parser)]
#[command(name = "motorbeat", version, about = "Acoustic heartbeats and timecodes from motor PWM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the sound of one symbol to a WAV file.
    Gen(GenArgs),
    /// Encode a payload into a frame and write the microphone track.
    Tx(TxArgs),
    /// Detect heartbeats and messages in a WAV file or raw float32 stdin.
    Rx(RxArgs),
    /// Run a simulation experiment and report its metrics.
    Bench(BenchArgs),
    /// Data rate table.
    Rate(RateArgs),
}

#[derive(Args, Clone)]
struct CodecArgs {
    /// Symbol length in seconds.
    #[arg(long, default_value_t = 1.0)]
    symbol_length: f64,
    /// Interval resolution in seconds.
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    /// Bits per interval; the rate-optimal value when omitted.
    #[arg(long)]
    bits_per_interval: Option<u32>,
    #[arg(long, default_value_t = 4)]
    frame_symbols: u32,
}

impl CodecArgs {
    fn codec(&self) -> Result<FrameCodec> {
        Ok(match self.bits_per_interval {
            Some(n) => FrameCodec::new(n, self.delta, self.symbol_length, self.frame_symbols)?,
            None => optimal_codec(self.symbol_length, self.delta, self.frame_symbols, N_MAX)?,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    F32,
    Pcm16,
}

impl From<Format> for WavFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::F32 => WavFormat::Float32,
            Format::Pcm16 => WavFormat::Pcm16,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Signal {
    /// Motor sound.
    Ei,
    /// Drive voltage, 0 or 1.
    Voltage,
    /// Zero-mean detection template.
    Template,
}

#[derive(Args)]
struct SoundArgs {
    /// Duty cycle of the drive.
    #[arg(long, default_value_t = 0.5)]
    duty: f64,
    /// Sound each edge as a single impulse instead of a filtered square wave.
    #[arg(long)]
    edge_impulse: bool,
    #[arg(long, value_enum, default_value_t = Format::F32)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    sample_rate: u32,
}

impl SoundArgs {
    fn kernel(&self) -> SpikeKernel {
        if self.edge_impulse {
            SpikeKernel::edge_impulse()
        } else {
            SpikeKernel::default()
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    id: u16,
    #[arg(long, default_value_t = 1.0)]
    symbol_length: f64,
    #[arg(long, value_enum, default_value_t = Signal::Ei)]
    signal: Signal,
    #[command(flatten)]
    sound: SoundArgs,
    /// Output WAV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TxArgs {
    #[arg(long)]
    id: u16,
    #[command(flatten)]
    codec: CodecArgs,
    /// Payload as a bit string.
    #[arg(long, conflicts_with = "hex")]
    bits: Option<String>,
    /// Payload as hex, right-aligned to the payload width.
    #[arg(long)]
    hex: Option<String>,
    /// Start of the first symbol, seconds.
    #[arg(long, default_value_t = 0.5)]
    t0: f64,
    /// Silence after the last symbol, seconds.
    #[arg(long, default_value_t = 0.5)]
    tail: f64,
    /// Add white noise at this SNR relative to the symbol power.
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Seeds the noise and, without a payload, the random payload.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    sound: SoundArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RxArgs {
    /// WAV file, or `-` for stdin. Stdin may hold a WAV file or raw
    /// little-endian float32 samples.
    #[arg(default_value = "-")]
    input: String,
    /// Appliance registry (TOML). Without it, `--id` appliances share the
    /// codec flags.
    #[arg(long)]
    registry: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    id: Vec<u16>,
    #[command(flatten)]
    codec: CodecArgs,
    /// Expected heartbeat period of the `--id` appliances, seconds.
    #[arg(long)]
    heartbeat_period: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    sample_rate: u32,
    /// Detection threshold in noise standard deviations.
    #[arg(long)]
    threshold: Option<f64>,
    /// Only listen for the other appliances after this one is heard.
    #[arg(long)]
    preamble: Option<u16>,
    /// Skip appliances with a known period until their next beat is due.
    #[arg(long)]
    skip: bool,
    #[arg(long)]
    highpass_hz: Option<f64>,
    /// Seconds of audio per chunk fed to the receiver.
    #[arg(long, default_value_t = 1.0)]
    chunk: f64,
    /// Print events as JSON lines.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment name, or `all`.
    experiment: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Grid overrides in TOML; flags below take precedence.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    symbol_length: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    speed: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    scenario: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    duty: Option<Vec<f64>>,
    /// Transmitter IDs, comma separated. Repeat for several concurrency sets.
    #[arg(long)]
    id: Vec<String>,
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    bits_per_interval: Option<u32>,
    #[arg(long)]
    frame_symbols: Option<u32>,
    /// CSV report path; the JSON mirror goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Write the first simulated microphone track.
    #[arg(long)]
    wav: Option<PathBuf>,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.0625, 0.125, 0.25, 0.5, 1.0, 2.0])]
    symbol_length: Vec<f64>,
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    #[arg(long)]
    bits_per_interval: Option<u32>,
    #[arg(long, default_value_t = 4)]
    frame_symbols: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Tx(a) => tx(a),
        Command::Rx(a) => rx(a),
        Command::Bench(a) => run_bench(a),
        Command::Rate(a) => rate(a),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let symbol = VpwmSymbol::generate(ApplianceId(a.id), a.symbol_length, &MotorProfile::default())?;
    let fs = a.sound.sample_rate;
    let pulses = symbol.pulse_count();
    let audio = match a.signal {
        Signal::Ei => symbol_audio(&symbol, a.sound.duty, &a.sound.kernel(), fs)?,
        Signal::Voltage => symbol.with_duty(a.sound.duty)?.render_voltage(&[], fs)?,
        Signal::Template => symbol.normalize_template(fs)?,
    };
    write_wav(&a.out, &audio, a.sound.format.into())?;
    eprintln!("wrote {} ({} samples, {} pulses)", a.out.display(), audio.len(), pulses);
    Ok(())
}

fn payload(a: &TxArgs, width: usize) -> Result<Vec<bool>> {
    if let Some(b) = &a.bits {
        return Ok(parse_bits(b)?);
    }
    if let Some(h) = &a.hex {
        return hex_bits(h, width);
    }
    let mut rng = SplitMix64::new(a.seed);
    Ok((0..width).map(|_| rng.next_u64() >> 63 == 1).collect())
}

fn hex_bits(hex: &str, width: usize) -> Result<Vec<bool>> {
    let digits = hex.trim().trim_start_matches("0x");
    let mut bits = Vec::with_capacity(digits.len() * 4);
    for c in digits.chars() {
        let v = c.to_digit(16).with_context(|| format!("invalid hex digit {c:?}"))?;
        bits.extend((0..4).rev().map(|k| v >> k & 1 == 1));
    }
    let extra = bits.len().saturating_sub(width);
    if bits[..extra].iter().any(|&b| b) {
        bail!("{hex} does not fit in {width} bits");
    }
    let mut out = vec![false; width.saturating_sub(bits.len())];
    out.extend_from_slice(&bits[extra..]);
    Ok(out)
}

fn tx(a: TxArgs) -> Result<()> {
    let codec = a.codec.codec()?;
    let bits = payload(&a, codec.payload_bits())?;
    let symbol = VpwmSymbol::generate(ApplianceId(a.id), codec.symbol_length, &MotorProfile::default())?;
    let schedule = codec.schedule(&symbol, &bits, a.t0)?;
    let fs = a.sound.sample_rate;
    let source = Source {
        id: ApplianceId(a.id),
        audio: symbol_audio(&symbol, a.sound.duty, &a.sound.kernel(), fs)?,
        starts: schedule.start_times.clone(),
        bits: bits.clone(),
    };
    let channel = SceneChannel { snr_db: a.snr_db.unwrap_or(f64::INFINITY), ..SceneChannel::default() };
    let (track, _) = render_scene(&[source], &channel, schedule.end_time() + a.tail, fs, a.seed)?;
    write_wav(&a.out, &track, a.sound.format.into())?;
    let starts: Vec<String> = schedule.start_times.iter().map(|t| format!("{t:.6}")).collect();
    println!(
        "TX,{},{:.6},{},N={},M={},starts={}",
        a.id,
        a.t0,
        bits_to_hex(&bits),
        codec.bits_per_interval,
        codec.symbols_per_frame,
        starts.join(";")
    );
    Ok(())
}

fn registry(a: &RxArgs) -> Result<Registry> {
    if let Some(path) = &a.registry {
        let mut file = RegistryFile::load(path).with_context(|| format!("loading {}", path.display()))?;
        file.sample_rate.get_or_insert(a.sample_rate);
        return Ok(Registry::from_file_spec(&file)?);
    }
    if a.id.is_empty() {
        bail!("give --registry or at least one --id");
    }
    let codec = a.codec.codec()?;
    let mut reg = Registry::new(a.sample_rate);
    for &id in &a.id {
        reg.register(ApplianceId(id), codec, a.heartbeat_period)?;
    }
    Ok(reg)
}

fn print_events(out: &mut impl Write, events: &[Event], json: bool) -> Result<()> {
    for e in events {
        if json {
            let detail = match e {
                Event::Heartbeat(h) => serde_json::json!({"kind": "HB", "score": h.score}),
                Event::Message(m) => serde_json::json!({"kind": "MSG", "hex": bits_to_hex(&m.bits), "bits": m.bit_string()}),
                Event::Partial(p) => serde_json::json!({"kind": "PART", "count": p.count}),
            };
            let mut obj = detail;
            obj["id"] = e.id().value().into();
            obj["timestamp"] = e.timestamp().into();
            writeln!(out, "{obj}")?;
        } else {
            writeln!(out, "{e}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn rx(a: RxArgs) -> Result<()> {
    let reg = registry(&a)?;
    let fs = reg.sample_rate();
    let config = DetectorConfig {
        threshold_sigmas: a.threshold.unwrap_or(DetectorConfig::default().threshold_sigmas),
        preamble_id: a.preamble.map(ApplianceId),
        skip_after_detect: a.skip,
        highpass_hz: a.highpass_hz,
        ..DetectorConfig::default()
    };
    let mut receiver = Receiver::new(&reg, config)?;
    for d in receiver.diagnostics() {
        eprintln!("warning: {d}");
    }
    let chunk = ((a.chunk * fs as f64).round() as usize).max(1);
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut position = 0usize;
    let mut feed = |samples: &[f64], receiver: &mut Receiver, out: &mut BufWriter<io::StdoutLock>| -> Result<()> {
        for part in samples.chunks(chunk) {
            let audio = AudioBuffer::with_start(part.to_vec(), fs, position as f64 / fs as f64)?;
            position += part.len();
            let events = receiver.push(&audio)?;
            print_events(out, &events, a.json)?;
        }
        Ok(())
    };
    if a.input == "-" {
        let mut stdin = io::stdin().lock();
        let mut head = [0u8; 4];
        let got = read_full(&mut stdin, &mut head)?;
        if got == 4 && &head == b"RIFF" {
            let mut bytes = head.to_vec();
            stdin.read_to_end(&mut bytes)?;
            feed(read_wav_bytes(&bytes, fs)?.samples(), &mut receiver, &mut out)?;
        } else {
            let mut pending = head[..got].to_vec();
            let mut buf = vec![0u8; chunk * 4];
            loop {
                let n = stdin.read(&mut buf)?;
                if n == 0 {
                    break;
                }
                pending.extend_from_slice(&buf[..n]);
                let whole = pending.len() / 4 * 4;
                let samples: Vec<f64> =
                    pending[..whole].chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64).collect();
                pending.drain(..whole);
                if !samples.is_empty() {
                    feed(&samples, &mut receiver, &mut out)?;
                }
            }
            if !pending.is_empty() {
                eprintln!("warning: dropped {} trailing bytes", pending.len());
            }
        }
    } else {
        let audio = read_wav(&a.input, fs).with_context(|| format!("reading {}", a.input))?;
        feed(audio.samples(), &mut receiver, &mut out)?;
    }
    let tail = receiver.finish();
    print_events(&mut out, &tail, a.json)?;
    for d in receiver.diagnostics() {
        eprintln!("warning: {d}");
    }
    Ok(())
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        let n = r.read(&mut buf[got..])?;
        if n == 0 {
            break;
        }
        got += n;
    }
    Ok(got)
}

fn bench_grid(a: &BenchArgs) -> Result<Grid> {
    let mut grid: Grid = match &a.grid {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Grid::from_toml_str(&text)?
        }
        None => Grid::default(),
    };
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value {
                grid.$field = Some(v);
            }
        };
    }
    set!(symbol_lengths, a.symbol_length.clone());
    set!(resolutions, a.delta.clone());
    set!(snrs_db, a.snr_db.clone());
    set!(speeds, a.speed.clone());
    set!(scenarios, a.scenario.clone());
    set!(duties, a.duty.clone());
    set!(jitter, a.jitter);
    set!(bits_per_interval, a.bits_per_interval);
    set!(frame_symbols, a.frame_symbols);
    if !a.id.is_empty() {
        let sets =
            a.id.iter()
                .map(|s| s.split(',').map(|v| v.trim().parse::<u16>().with_context(|| format!("bad id {v:?}"))).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
        grid.id_sets = Some(sets);
    }
    Ok(grid)
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let grid = bench_grid(&a)?;
    let experiments: Vec<Experiment> = if a.experiment == "all" { Experiment::ALL.to_vec() } else { vec![a.experiment.parse()?] };
    let mut reports = Vec::new();
    for (k, &e) in experiments.iter().enumerate() {
        let spec = ExperimentSpec::new(e).with_seed(a.seed).with_grid(grid.clone());
        let spec = match a.trials {
            Some(t) => spec.with_trials(t),
            None => spec,
        };
        eprintln!("running {e} ({} trials per cell)", spec.trials);
        reports.push(bench::run(&spec)?);
        if let (Some(path), 0) = (&a.wav, k) {
            write_wav(path, &bench::example_track(&spec)?, WavFormat::Float32)?;
        }
    }
    emit(&reports, a.out.as_deref(), a.json)
}

fn emit(reports: &[Report], out: Option<&Path>, json: bool) -> Result<()> {
    let merged = merge(reports);
    match out {
        Some(path) => {
            fs::write(path, merged.to_csv_string()?).with_context(|| format!("writing {}", path.display()))?;
            fs::write(path.with_extension("json"), merged.to_json_string()?)?;
            eprintln!("wrote {} and {}", path.display(), path.with_extension("json").display());
        }
        None if json => println!("{}", merged.to_json_string()?),
        None => print!("{}", merged.to_csv_string()?),
    }
    Ok(())
}

fn merge(reports: &[Report]) -> Report {
    let mut merged = reports[0].clone();
    for r in &reports[1..] {
        merged.rows.extend(r.rows.iter().cloned());
    }
    merged
}

fn rate(a: RateArgs) -> Result<()> {
    let mut report = Report::new("rate", 0, 1);
    for &l in &a.symbol_length {
        let codec = match a.bits_per_interval {
            Some(n) => FrameCodec::new(n, a.delta, l, a.frame_symbols)?,
            None => optimal_codec(l, a.delta, a.frame_symbols, N_MAX)?,
        };
        let params = [
            ("symbol_length", l.to_string()),
            ("delta", a.delta.to_string()),
            ("frame_symbols", a.frame_symbols.to_string()),
            ("bits_per_interval", codec.bits_per_interval.to_string()),
        ];
        report.push(&params, "t_min", codec.t_min(), None);
        report.push(&params, "rate_bps", codec.data_rate(), None);
    }
    emit(&[report], a.out.as_deref(), a.json)
}
