//! Simulation experiments and their reports.
//!
//! Every experiment sweeps a grid of cells, runs independent seeded trials
//! per cell and reports one row per (cell, metric). The same spec and seed
//! always produce the same report.

mod experiments;
mod report;
pub mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use experiments::{example_track, run};
pub use report::{wilson, Report, ReportRow};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BerVsSymbolLength,
    BerVsResolution,
    DetectionVsSnr,
    Concurrency,
    DutyMismatch,
    Mobility,
    Multipath,
    ComfortPsd,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::BerVsSymbolLength,
        Experiment::BerVsResolution,
        Experiment::DetectionVsSnr,
        Experiment::Concurrency,
        Experiment::DutyMismatch,
        Experiment::Mobility,
        Experiment::Multipath,
        Experiment::ComfortPsd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::BerVsSymbolLength => "ber-vs-symbol-length",
            Experiment::BerVsResolution => "ber-vs-resolution",
            Experiment::DetectionVsSnr => "detection-vs-snr",
            Experiment::Concurrency => "concurrency",
            Experiment::DutyMismatch => "duty-mismatch",
            Experiment::Mobility => "mobility",
            Experiment::Multipath => "multipath",
            Experiment::ComfortPsd => "comfort-psd",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Experiment::DetectionVsSnr => 200,
            Experiment::Mobility => 50,
            Experiment::ComfortPsd => 1,
            _ => 100,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('_', "-");
        Experiment::ALL.into_iter().find(|e| e.name() == key).ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s:?}")))
    }
}

/// Sweep axes. Unset axes take the experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub symbol_lengths: Option<Vec<f64>>,
    pub resolutions: Option<Vec<f64>>,
    pub snrs_db: Option<Vec<f64>>,
    pub speeds: Option<Vec<f64>>,
    pub scenarios: Option<Vec<String>>,
    pub duties: Option<Vec<f64>>,
    pub id_sets: Option<Vec<Vec<u16>>>,
    /// Emission jitter standard deviation, seconds.
    pub jitter: Option<f64>,
    pub frame_symbols: Option<u32>,
    /// Fixed `N`; by default the rate-optimal `N` of each cell.
    pub bits_per_interval: Option<u32>,
}

impl Grid {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: Experiment,
    #[serde(default)]
    pub grid: Grid,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(name: Experiment) -> Self {
        Self { name, grid: Grid::default(), trials: name.default_trials(), seed: 1 }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        let g = &self.grid;
        let positive = |name: &str, v: &Option<Vec<f64>>| -> Result<()> {
            match v {
                Some(v) if v.is_empty() || v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) => {
                    invalid(format!("{name} must be a non-empty list of positive values"))
                }
                _ => Ok(()),
            }
        };
        positive("symbol_lengths", &g.symbol_lengths)?;
        positive("resolutions", &g.resolutions)?;
        if g.snrs_db.as_ref().is_some_and(|v| v.is_empty() || v.iter().any(|x| x.is_nan())) {
            return invalid("snrs_db must be a non-empty list");
        }
        if g.speeds.as_ref().is_some_and(|v| v.is_empty() || v.iter().any(|x| !(x.abs() < 100.0))) {
            return invalid("speeds must be a non-empty list below 100 m/s");
        }
        if g.duties.as_ref().is_some_and(|v| v.is_empty() || v.iter().any(|x| !(*x > 0.0 && *x < 1.0))) {
            return invalid("duties must lie strictly between 0 and 1");
        }
        if g.id_sets.as_ref().is_some_and(|s| s.is_empty() || s.iter().any(|ids| ids.is_empty() || has_duplicates(ids))) {
            return invalid("id sets must be non-empty with distinct ids");
        }
        if g.jitter.is_some_and(|j| !(j >= 0.0) || !j.is_finite()) {
            return invalid("jitter must be non-negative");
        }
        if g.frame_symbols == Some(0) {
            return invalid("frame_symbols must be at least 1");
        }
        if let Some(s) = &g.scenarios {
            for name in s {
                experiments::scenario_taps(name)?;
            }
        }
        Ok(())
    }
}

fn has_duplicates(ids: &[u16]) -> bool {
    let mut v = ids.to_vec();
    v.sort_unstable();
    v.windows(2).any(|w| w[0] == w[1])
}
