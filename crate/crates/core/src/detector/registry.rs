use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{invalid, Error, Result};
use crate::symbolgen::{ApplianceId, MotorProfile, VpwmSymbol, DEFAULT_SAMPLE_RATE};
use crate::timecode::FrameCodec;

/// What the receiver knows about one appliance.
#[derive(Debug, Clone)]
pub struct RegistryEntry {
    pub id: ApplianceId,
    pub template: AudioBuffer,
    pub codec: FrameCodec,
    pub heartbeat_period: Option<f64>,
}

/// Templates and codecs of every appliance the receiver listens for.
#[derive(Debug, Clone)]
pub struct Registry {
    sample_rate: u32,
    entries: BTreeMap<ApplianceId, RegistryEntry>,
}

impl Registry {
    pub fn new(sample_rate: u32) -> Self {
        Self { sample_rate, entries: BTreeMap::new() }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Registers an appliance whose template is generated from its ID with
    /// the default motor profile.
    pub fn register(&mut self, id: ApplianceId, codec: FrameCodec, heartbeat_period: Option<f64>) -> Result<()> {
        self.register_with_profile(id, codec, &MotorProfile::default(), heartbeat_period)
    }

    pub fn register_with_profile(
        &mut self,
        id: ApplianceId,
        codec: FrameCodec,
        profile: &MotorProfile,
        heartbeat_period: Option<f64>,
    ) -> Result<()> {
        let symbol = VpwmSymbol::generate(id, codec.symbol_length, profile)?;
        let template = symbol.normalize_template(self.sample_rate)?;
        self.insert_template(id, template, codec, heartbeat_period)
    }

    /// Registers an arbitrary template.
    pub fn insert_template(
        &mut self,
        id: ApplianceId,
        template: AudioBuffer,
        codec: FrameCodec,
        heartbeat_period: Option<f64>,
    ) -> Result<()> {
        codec.validate()?;
        if template.sample_rate() != self.sample_rate {
            return invalid(format!("template sample rate {} differs from registry rate {}", template.sample_rate(), self.sample_rate));
        }
        if template.is_empty() {
            return invalid("empty template");
        }
        if heartbeat_period.is_some_and(|p| !(p > 0.0)) {
            return invalid("heartbeat period must be positive");
        }
        if self.entries.contains_key(&id) {
            return invalid(format!("appliance {id} is already registered"));
        }
        self.entries.insert(id, RegistryEntry { id, template, codec, heartbeat_period });
        Ok(())
    }

    pub fn get(&self, id: ApplianceId) -> Option<&RegistryEntry> {
        self.entries.get(&id)
    }

    pub fn contains(&self, id: ApplianceId) -> bool {
        self.entries.contains_key(&id)
    }

    /// Entries in ascending ID order.
    pub fn entries(&self) -> impl Iterator<Item = &RegistryEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_template_len(&self) -> usize {
        self.entries.values().map(|e| e.template.len()).max().unwrap_or(0)
    }

    pub fn max_symbol_length(&self) -> f64 {
        self.entries.values().map(|e| e.codec.symbol_length).fold(0.0, f64::max)
    }

    pub fn from_file_spec(file: &RegistryFile) -> Result<Self> {
        let mut reg = Registry::new(file.sample_rate.unwrap_or(DEFAULT_SAMPLE_RATE));
        for a in &file.appliance {
            let codec = FrameCodec::new(a.bits_per_interval, a.delta, a.symbol_length, a.frame_symbols)?;
            let mut profile = MotorProfile::default();
            if let Some(v) = a.min_switch_period {
                profile.min_switch_period = v;
            }
            if let Some(v) = a.max_switch_period {
                profile.max_switch_period = v;
            }
            if let Some(v) = a.time_constant {
                profile.time_constant = v;
            }
            reg.register_with_profile(ApplianceId(a.id), codec, &profile, a.heartbeat_period)?;
        }
        Ok(reg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_file_spec(&RegistryFile::from_toml_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file_spec(&RegistryFile::load(path)?)
    }
}

/// On-disk registry, TOML:
///
/// ```toml
/// sample_rate = 24000
///
/// [[appliance]]
/// id = 3
/// symbol_length = 1.0
/// delta = 0.02
/// bits_per_interval = 3
/// frame_symbols = 4
/// heartbeat_period = 10.0   # optional
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryFile {
    pub sample_rate: Option<u32>,
    #[serde(default)]
    pub appliance: Vec<RegistryFileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryFileEntry {
    pub id: u16,
    pub symbol_length: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_bits")]
    pub bits_per_interval: u32,
    #[serde(default = "default_frame")]
    pub frame_symbols: u32,
    pub heartbeat_period: Option<f64>,
    pub min_switch_period: Option<f64>,
    pub max_switch_period: Option<f64>,
    pub time_constant: Option<f64>,
}

fn default_delta() -> f64 {
    FrameCodec::default().resolution
}

fn default_bits() -> u32 {
    FrameCodec::default().bits_per_interval
}

fn default_frame() -> u32 {
    FrameCodec::default().symbols_per_frame
}

impl RegistryFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file() {
        let text = r#"
            sample_rate = 24000
            [[appliance]]
            id = 3
            symbol_length = 0.5
            heartbeat_period = 10.0
            [[appliance]]
            id = 8
            symbol_length = 1.0
            delta = 0.04
            bits_per_interval = 2
            frame_symbols = 3
        "#;
        let reg = Registry::from_toml_str(text).unwrap();
        assert_eq!(reg.len(), 2);
        let e = reg.get(ApplianceId(8)).unwrap();
        assert_eq!(e.codec, FrameCodec::new(2, 0.04, 1.0, 3).unwrap());
        assert_eq!(reg.get(ApplianceId(3)).unwrap().heartbeat_period, Some(10.0));
        assert!(reg.max_template_len() >= 24_000);
    }

    #[test]
    fn rejects_duplicates_and_rate_mismatch() {
        let mut reg = Registry::new(24_000);
        reg.register(ApplianceId(1), FrameCodec::default(), None).unwrap();
        assert!(reg.register(ApplianceId(1), FrameCodec::default(), None).is_err());
        let t = AudioBuffer::new(vec![1.0; 10], 16_000).unwrap();
        assert!(reg.insert_template(ApplianceId(2), t, FrameCodec::default(), None).is_err());
        assert!(Registry::from_toml_str("[[appliance]]\nid = 1\nsymbol_length = 1.0\nbogus = 2").is_err());
    }

    #[test]
    fn file_round_trip() {
        let file = RegistryFile {
            sample_rate: Some(24_000),
            appliance: vec![RegistryFileEntry {
                id: 9,
                symbol_length: 2.0,
                delta: 0.02,
                bits_per_interval: 4,
                frame_symbols: 4,
                heartbeat_period: None,
                min_switch_period: None,
                max_switch_period: None,
                time_constant: None,
            }],
        };
        let text = file.to_toml_string().unwrap();
        let back: RegistryFile = toml::from_str(&text).unwrap();
        assert_eq!(back, file);
    }
}
