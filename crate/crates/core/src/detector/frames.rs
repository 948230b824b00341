use super::events::{DecodedMessage, Event, Heartbeat, PartialFrame};
use crate::timecode::FrameCodec;

/// Groups one appliance's heartbeats into frames as they arrive.
///
/// Consecutive heartbeats belong to the same frame while their gap stays
/// within [`FrameCodec::frame_gap_limit`]. Every `M` heartbeats form a
/// frame whose `M - 1` gaps are decoded. A run that breaks off with at
/// least two heartbeats is reported as partial.
#[derive(Debug, Clone)]
pub struct FrameAssembler {
    codec: FrameCodec,
    run: Vec<Heartbeat>,
}

impl FrameAssembler {
    pub fn new(codec: FrameCodec) -> Self {
        Self { codec, run: Vec::new() }
    }

    pub fn push(&mut self, hb: Heartbeat) -> Vec<Event> {
        let mut out = Vec::new();
        if self.codec.symbols_per_frame < 2 {
            return out;
        }
        if let Some(last) = self.run.last() {
            if hb.timestamp - last.timestamp > self.codec.frame_gap_limit() {
                out.extend(self.close());
            }
        }
        self.run.push(hb);
        if self.run.len() == self.codec.symbols_per_frame as usize {
            let gaps: Vec<f64> = self.run.windows(2).map(|w| w[1].timestamp - w[0].timestamp).collect();
            if let Ok(bits) = self.codec.decode_intervals(&gaps) {
                out.push(Event::Message(DecodedMessage { id: self.run[0].id, timestamp: self.run[0].timestamp, bits }));
            }
            self.run.clear();
        }
        out
    }

    /// Ends the current run, e.g. at end of stream.
    pub fn close(&mut self) -> Option<Event> {
        let run = std::mem::take(&mut self.run);
        (run.len() >= 2).then(|| Event::Partial(PartialFrame { id: run[0].id, timestamp: run[0].timestamp, count: run.len() }))
    }

    /// Time after which the current run can no longer be extended.
    pub fn expires_at(&self) -> Option<f64> {
        self.run.last().map(|h| h.timestamp + self.codec.frame_gap_limit())
    }
}

/// Offline frame assembly over a time-ordered heartbeat list of one
/// appliance.
pub fn assemble_messages(heartbeats: &[Heartbeat], codec: &FrameCodec) -> Vec<Event> {
    let mut asm = FrameAssembler::new(*codec);
    let mut out: Vec<Event> = heartbeats.iter().flat_map(|h| asm.push(h.clone())).collect();
    out.extend(asm.close());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolgen::ApplianceId;
    use crate::timecode::parse_bits;

    fn beats(times: &[f64]) -> Vec<Heartbeat> {
        times.iter().map(|&t| Heartbeat { id: ApplianceId(4), timestamp: t, score: 20.0 }).collect()
    }

    #[test]
    fn decodes_a_frame() {
        let c = FrameCodec::default();
        let ev = assemble_messages(&beats(&[10.0, 11.33, 12.64, 14.03]), &c);
        assert_eq!(ev.len(), 1);
        let Event::Message(m) = &ev[0] else { panic!("{ev:?}") };
        assert_eq!(m.bits, parse_bits("100011111").unwrap());
        assert_eq!(m.timestamp, 10.0);
    }

    #[test]
    fn constant_bias_is_harmless() {
        let c = FrameCodec::default();
        let plain = assemble_messages(&beats(&[0.0, 1.33, 2.64, 4.03]), &c);
        let biased = assemble_messages(&beats(&[0.0, 1.339, 2.658, 4.057]), &c);
        assert_eq!(plain, biased);
    }

    #[test]
    fn broken_run_is_partial() {
        let c = FrameCodec::default();
        let ev = assemble_messages(&beats(&[0.0, 1.33, 2.66, 20.0]), &c);
        assert_eq!(ev, vec![Event::Partial(PartialFrame { id: ApplianceId(4), timestamp: 0.0, count: 3 })]);
        assert!(assemble_messages(&beats(&[5.0]), &c).is_empty());
    }

    #[test]
    fn back_to_back_frames() {
        let c = FrameCodec::default();
        let t = [0.0, 1.33, 2.66, 3.99, 30.0, 31.25, 32.5, 33.75];
        let ev = assemble_messages(&beats(&t), &c);
        assert_eq!(ev.len(), 2);
        assert!(matches!(&ev[1], Event::Message(m) if m.bits == vec![false; 9]));
    }
}
