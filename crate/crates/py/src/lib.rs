//! Python bindings. Audio crosses the boundary as lists of floats and
//! events as their text lines.

use motorbeat::acoustics::SpikeKernel;
use motorbeat::bench::synth::{render_scene, symbol_audio, SceneChannel, Source};
use motorbeat::bench::{self, ExperimentSpec, Grid};
use motorbeat::symbolgen::DEFAULT_SAMPLE_RATE;
use motorbeat::timecode::{bits_to_string, optimal_codec, parse_bits};
use motorbeat::{ApplianceId, AudioBuffer, DetectorConfig, FrameCodec, MotorProfile, Registry, VpwmSymbol};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

const N_MAX: u32 = 12;

fn err(e: motorbeat::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn make_codec(symbol_length: f64, delta: f64, frame_symbols: u32, bits_per_interval: Option<u32>) -> PyResult<FrameCodec> {
    match bits_per_interval {
        Some(n) => FrameCodec::new(n, delta, symbol_length, frame_symbols),
        None => optimal_codec(symbol_length, delta, frame_symbols, N_MAX),
    }
    .map_err(err)
}

fn generate(id: u16, symbol_length: f64) -> PyResult<VpwmSymbol> {
    VpwmSymbol::generate(ApplianceId(id), symbol_length, &MotorProfile::default()).map_err(err)
}

/// Motor sound of one symbol, unit peak.
#[pyfunction]
#[pyo3(signature = (id, symbol_length=1.0, duty=0.5, sample_rate=DEFAULT_SAMPLE_RATE))]
fn symbol_sound(id: u16, symbol_length: f64, duty: f64, sample_rate: u32) -> PyResult<Vec<f64>> {
    let audio = symbol_audio(&generate(id, symbol_length)?, duty, &SpikeKernel::default(), sample_rate).map_err(err)?;
    Ok(audio.into_samples())
}

/// Zero-mean +/-1 detection template.
#[pyfunction]
#[pyo3(signature = (id, symbol_length=1.0, sample_rate=DEFAULT_SAMPLE_RATE))]
fn template(id: u16, symbol_length: f64, sample_rate: u32) -> PyResult<Vec<f64>> {
    Ok(generate(id, symbol_length)?.normalize_template(sample_rate).map_err(err)?.into_samples())
}

/// Switching periods of a symbol, seconds.
#[pyfunction]
#[pyo3(signature = (id, symbol_length=1.0))]
fn periods(id: u16, symbol_length: f64) -> PyResult<Vec<f64>> {
    Ok(generate(id, symbol_length)?.periods().to_vec())
}

#[pyfunction]
#[pyo3(signature = (symbol_length=1.0, delta=0.02, frame_symbols=4, bits_per_interval=None))]
fn data_rate(symbol_length: f64, delta: f64, frame_symbols: u32, bits_per_interval: Option<u32>) -> PyResult<f64> {
    Ok(make_codec(symbol_length, delta, frame_symbols, bits_per_interval)?.data_rate())
}

/// Microphone track of one frame carrying `bits`.
#[pyfunction]
#[pyo3(signature = (id, bits, symbol_length=1.0, delta=0.02, frame_symbols=4, bits_per_interval=None, t0=0.5, snr_db=None, seed=1, sample_rate=DEFAULT_SAMPLE_RATE))]
#[allow(clippy::too_many_arguments)]
fn transmit(
    id: u16,
    bits: &str,
    symbol_length: f64,
    delta: f64,
    frame_symbols: u32,
    bits_per_interval: Option<u32>,
    t0: f64,
    snr_db: Option<f64>,
    seed: u64,
    sample_rate: u32,
) -> PyResult<Vec<f64>> {
    let codec = make_codec(symbol_length, delta, frame_symbols, bits_per_interval)?;
    let bits = parse_bits(bits).map_err(err)?;
    let symbol = generate(id, codec.symbol_length)?;
    let schedule = codec.schedule(&symbol, &bits, t0).map_err(err)?;
    let source = Source {
        id: ApplianceId(id),
        audio: symbol_audio(&symbol, 0.5, &SpikeKernel::default(), sample_rate).map_err(err)?,
        starts: schedule.start_times.clone(),
        bits,
    };
    let channel = SceneChannel { snr_db: snr_db.unwrap_or(f64::INFINITY), ..SceneChannel::default() };
    let (track, _) = render_scene(&[source], &channel, schedule.end_time() + 0.5, sample_rate, seed).map_err(err)?;
    Ok(track.into_samples())
}

/// Runs an experiment and returns the CSV report.
#[pyfunction]
#[pyo3(signature = (name, trials=None, seed=1, grid=None, json=false))]
fn run_bench(name: &str, trials: Option<usize>, seed: u64, grid: Option<&str>, json: bool) -> PyResult<String> {
    let grid = grid.map(Grid::from_toml_str).transpose().map_err(err)?.unwrap_or_default();
    let mut spec = ExperimentSpec::new(name.parse().map_err(err)?).with_seed(seed).with_grid(grid);
    if let Some(t) = trials {
        spec = spec.with_trials(t);
    }
    let report = bench::run(&spec).map_err(err)?;
    if json { report.to_json_string() } else { report.to_csv_string() }.map_err(err)
}

#[pyclass]
struct Codec {
    inner: FrameCodec,
}

#[pymethods]
impl Codec {
    #[new]
    #[pyo3(signature = (symbol_length=1.0, delta=0.02, frame_symbols=4, bits_per_interval=None))]
    fn new(symbol_length: f64, delta: f64, frame_symbols: u32, bits_per_interval: Option<u32>) -> PyResult<Self> {
        Ok(Self { inner: make_codec(symbol_length, delta, frame_symbols, bits_per_interval)? })
    }

    #[getter]
    fn bits_per_interval(&self) -> u32 {
        self.inner.bits_per_interval
    }

    #[getter]
    fn payload_bits(&self) -> usize {
        self.inner.payload_bits()
    }

    #[getter]
    fn t_min(&self) -> f64 {
        self.inner.t_min()
    }

    #[getter]
    fn data_rate(&self) -> f64 {
        self.inner.data_rate()
    }

    fn encode(&self, bits: &str) -> PyResult<Vec<f64>> {
        self.inner.encode_intervals(&parse_bits(bits).map_err(err)?).map_err(err)
    }

    fn decode(&self, intervals: Vec<f64>) -> PyResult<String> {
        Ok(bits_to_string(&self.inner.decode_intervals(&intervals).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "Codec(symbol_length={}, delta={}, frame_symbols={}, bits_per_interval={})",
            c.symbol_length, c.resolution, c.symbols_per_frame, c.bits_per_interval
        )
    }
}

/// Streaming detector. Feed consecutive sample blocks to `push`, then call
/// `finish`; both return event lines.
#[pyclass]
struct Receiver {
    inner: motorbeat::Receiver,
    sample_rate: u32,
    position: usize,
}

#[pymethods]
impl Receiver {
    #[new]
    #[pyo3(signature = (ids=None, symbol_length=1.0, delta=0.02, frame_symbols=4, bits_per_interval=None, sample_rate=DEFAULT_SAMPLE_RATE, registry=None, threshold=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        ids: Option<Vec<u16>>,
        symbol_length: f64,
        delta: f64,
        frame_symbols: u32,
        bits_per_interval: Option<u32>,
        sample_rate: u32,
        registry: Option<&str>,
        threshold: Option<f64>,
    ) -> PyResult<Self> {
        let reg = match registry {
            Some(toml) => Registry::from_toml_str(toml).map_err(err)?,
            None => {
                let codec = make_codec(symbol_length, delta, frame_symbols, bits_per_interval)?;
                let mut reg = Registry::new(sample_rate);
                for id in ids.unwrap_or_default() {
                    reg.register(ApplianceId(id), codec, None).map_err(err)?;
                }
                reg
            }
        };
        let mut config = DetectorConfig::default();
        if let Some(k) = threshold {
            config.threshold_sigmas = k;
        }
        let sample_rate = reg.sample_rate();
        Ok(Self { inner: motorbeat::Receiver::new(&reg, config).map_err(err)?, sample_rate, position: 0 })
    }

    fn push(&mut self, samples: Vec<f64>) -> PyResult<Vec<String>> {
        let n = samples.len();
        let chunk = AudioBuffer::with_start(samples, self.sample_rate, self.position as f64 / self.sample_rate as f64).map_err(err)?;
        self.position += n;
        Ok(self.inner.push(&chunk).map_err(err)?.iter().map(ToString::to_string).collect())
    }

    fn finish(&mut self) -> Vec<String> {
        self.inner.finish().iter().map(ToString::to_string).collect()
    }

    #[getter]
    fn diagnostics(&self) -> Vec<String> {
        self.inner.diagnostics().to_vec()
    }
}

#[pymodule]
fn motorbeat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(symbol_sound, m)?)?;
    m.add_function(wrap_pyfunction!(template, m)?)?;
    m.add_function(wrap_pyfunction!(periods, m)?)?;
    m.add_function(wrap_pyfunction!(data_rate, m)?)?;
    m.add_function(wrap_pyfunction!(transmit, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_class::<Codec>()?;
    m.add_class::<Receiver>()?;
    Ok(())
}
