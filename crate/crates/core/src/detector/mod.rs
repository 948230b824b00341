//! Correlation receiver.
//!
//! Audio is cut into overlapping windows, each window is correlated with
//! every registered template, and peaks of the absolute correlation that
//! stand far enough above the window's own noise floor become heartbeats.
//! Heartbeats of one appliance are grouped into frames whose spacing is
//! decoded back into payload bits.

mod cir;
mod config;
mod events;
mod frames;
mod registry;
mod stats;
mod stream;
mod window;

pub use cir::{extract_cir, CirEstimate};
pub use config::DetectorConfig;
pub use events::{DecodedMessage, Event, Heartbeat, PartialFrame};
pub use frames::{assemble_messages, FrameAssembler};
pub use registry::{Registry, RegistryEntry, RegistryFile, RegistryFileEntry};
pub use stats::{noise_stats, NoiseStats};
pub use stream::{Receiver, ReceiverCounters};
pub use window::{detect_window, RawDetection, WindowDetections};
