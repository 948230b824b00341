use std::fmt;

use crate::symbolgen::ApplianceId;
use crate::timecode::{bits_to_hex, bits_to_string};

/// An appliance was heard running.
#[derive(Debug, Clone, PartialEq)]
pub struct Heartbeat {
    pub id: ApplianceId,
    /// Seconds on the stream timeline.
    pub timestamp: f64,
    /// Peak height in noise standard deviations above the noise mean.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedMessage {
    pub id: ApplianceId,
    /// Start of the frame's first symbol.
    pub timestamp: f64,
    pub bits: Vec<bool>,
}

impl DecodedMessage {
    pub fn bit_string(&self) -> String {
        bits_to_string(&self.bits)
    }
}

/// A run of heartbeats that ended before completing a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFrame {
    pub id: ApplianceId,
    pub timestamp: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Heartbeat(Heartbeat),
    Message(DecodedMessage),
    Partial(PartialFrame),
}

impl Event {
    pub fn id(&self) -> ApplianceId {
        match self {
            Event::Heartbeat(h) => h.id,
            Event::Message(m) => m.id,
            Event::Partial(p) => p.id,
        }
    }

    pub fn timestamp(&self) -> f64 {
        match self {
            Event::Heartbeat(h) => h.timestamp,
            Event::Message(m) => m.timestamp,
            Event::Partial(p) => p.timestamp,
        }
    }
}

/// Line format: `HB,<id>,<t>,<score>`, `MSG,<id>,<t>,<hex>`,
/// `PART,<id>,<t>,<count>`.
impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Heartbeat(h) => write!(f, "HB,{},{:.6},{:.3}", h.id, h.timestamp, h.score),
            Event::Message(m) => write!(f, "MSG,{},{:.6},{}", m.id, m.timestamp, bits_to_hex(&m.bits)),
            Event::Partial(p) => write!(f, "PART,{},{:.6},{}", p.id, p.timestamp, p.count),
        }
    }
}
