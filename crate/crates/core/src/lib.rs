//! Appliance identification and timing telemetry from motor PWM acoustics.
//!
//! Each appliance drives its motor with a pseudo-random switching pattern
//! derived from its 16-bit ID. The pattern leaks as sound; a microphone
//! correlates against known patterns to recover who is running and, from
//! the spacing between repetitions, a few bits of data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod audio;
pub mod bench;
pub mod detector;
pub mod error;
pub mod symbolgen;
pub mod timecode;

pub use audio::AudioBuffer;
pub use detector::{DetectorConfig, Event, Receiver, Registry};
pub use error::{Error, Result};
pub use symbolgen::{ApplianceId, MotorProfile, VpwmSymbol};
pub use timecode::FrameCodec;
