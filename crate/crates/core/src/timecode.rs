//! Data bits carried by the spacing between repeated symbols.
//!
//! Each group of `N` bits picks a shift `K·δ` around the minimum interval
//! `T_min = 1.25·L_sym + 2^(N-1)·δ`. Groups are read big-endian and mapped
//! offset-binary, so `K` runs over `[-2^(N-1), 2^(N-1) - 1]` and the
//! shortest interval is exactly `1.25·L_sym`: symbols never overlap.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::symbolgen::VpwmSymbol;

/// Bits implicitly carried by each symbol (the appliance ID).
pub const ID_BITS: u32 = 16;

/// Minimum gap between symbol starts, as a multiple of the symbol length.
pub const GUARD_FACTOR: f64 = 1.25;

const MAX_BITS_PER_INTERVAL: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCodec {
    /// `N`
    pub bits_per_interval: u32,
    /// `δ`, seconds
    pub resolution: f64,
    /// Requested symbol length, seconds
    pub symbol_length: f64,
    /// `M`
    pub symbols_per_frame: u32,
}

impl Default for FrameCodec {
    fn default() -> Self {
        Self { bits_per_interval: 3, resolution: 0.020, symbol_length: 1.0, symbols_per_frame: 4 }
    }
}

impl FrameCodec {
    pub fn new(bits_per_interval: u32, resolution: f64, symbol_length: f64, symbols_per_frame: u32) -> Result<Self> {
        let c = Self { bits_per_interval, resolution, symbol_length, symbols_per_frame };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_BITS_PER_INTERVAL).contains(&self.bits_per_interval) {
            return invalid(format!("bits per interval must be in 1..={MAX_BITS_PER_INTERVAL}"));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return invalid("time resolution must be positive");
        }
        if !(self.symbol_length > 0.0 && self.symbol_length.is_finite()) {
            return invalid("symbol length must be positive");
        }
        // A single-symbol frame carries only the ID.
        if self.symbols_per_frame == 0 {
            return invalid("a frame needs at least one symbol");
        }
        Ok(())
    }

    /// `2^(N-1)`
    fn half_range(&self) -> i64 {
        1_i64 << (self.bits_per_interval - 1)
    }

    pub fn t_min(&self) -> f64 {
        GUARD_FACTOR * self.symbol_length + self.half_range() as f64 * self.resolution
    }

    /// Payload bits per frame, `(M-1)·N`.
    pub fn payload_bits(&self) -> usize {
        (self.symbols_per_frame as usize - 1) * self.bits_per_interval as usize
    }

    pub fn min_interval(&self) -> f64 {
        GUARD_FACTOR * self.symbol_length
    }

    pub fn max_interval(&self) -> f64 {
        self.t_min() + (self.half_range() - 1) as f64 * self.resolution
    }

    /// A gap longer than this between two heartbeats of one appliance ends
    /// the current frame.
    pub fn frame_gap_limit(&self) -> f64 {
        1.5 * (self.t_min() + self.half_range() as f64 * self.resolution)
    }

    /// Average bit rate counting both payload and ID bits, with the mean
    /// interval taken as `T_min`.
    pub fn data_rate(&self) -> f64 {
        let m = self.symbols_per_frame as f64;
        let bits = (m - 1.0) * self.bits_per_interval as f64 + m * ID_BITS as f64;
        bits / (self.symbol_length + (m - 1.0) * self.t_min())
    }

    pub fn encode_intervals(&self, bits: &[bool]) -> Result<Vec<f64>> {
        if bits.len() != self.payload_bits() {
            return invalid(format!("expected {} payload bits, got {}", self.payload_bits(), bits.len()));
        }
        let t_min = self.t_min();
        Ok(bits
            .chunks(self.bits_per_interval as usize)
            .map(|group| {
                let v = group.iter().fold(0_i64, |acc, &b| (acc << 1) | b as i64);
                t_min + (v - self.half_range()) as f64 * self.resolution
            })
            .collect())
    }

    /// Nearest-shift decoding; out-of-range shifts are clamped so an outlier
    /// corrupts only its own group.
    pub fn decode_intervals(&self, intervals: &[f64]) -> Result<Vec<bool>> {
        if intervals.is_empty() {
            return invalid("no intervals to decode");
        }
        let n = self.bits_per_interval as usize;
        let half = self.half_range();
        let t_min = self.t_min();
        let mut bits = Vec::with_capacity(intervals.len() * n);
        for &iv in intervals {
            if !iv.is_finite() {
                return invalid("non-finite interval");
            }
            let k = (((iv - t_min) / self.resolution).round() as i64).clamp(-half, half - 1);
            let v = (k + half) as u64;
            bits.extend((0..n).rev().map(|b| (v >> b) & 1 == 1));
        }
        Ok(bits)
    }

    pub fn schedule(&self, symbol: &VpwmSymbol, bits: &[bool], t0: f64) -> Result<TransmissionSchedule> {
        let intervals = self.encode_intervals(bits)?;
        let mut start_times = Vec::with_capacity(intervals.len() + 1);
        start_times.push(t0);
        for iv in intervals {
            start_times.push(start_times.last().unwrap() + iv);
        }
        Ok(TransmissionSchedule { symbol: symbol.clone(), start_times })
    }
}

/// Start times of the `M` copies of one symbol making up a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSchedule {
    pub symbol: VpwmSymbol,
    pub start_times: Vec<f64>,
}

impl TransmissionSchedule {
    pub fn end_time(&self) -> f64 {
        self.start_times.last().copied().unwrap_or(0.0) + self.symbol.length()
    }
}

/// `N` in `1..=n_max` with the highest data rate; ties go to the smaller
/// `N`.
pub fn optimal_n(symbol_length: f64, resolution: f64, symbols_per_frame: u32, n_max: u32) -> Result<u32> {
    if n_max == 0 {
        return invalid("n_max must be at least 1");
    }
    let mut best = (0, f64::MIN);
    for n in 1..=n_max.min(MAX_BITS_PER_INTERVAL) {
        let r = FrameCodec::new(n, resolution, symbol_length, symbols_per_frame)?.data_rate();
        if r > best.1 {
            best = (n, r);
        }
    }
    Ok(best.0)
}

/// Codec using the rate-optimal `N` for the given parameters.
pub fn optimal_codec(symbol_length: f64, resolution: f64, symbols_per_frame: u32, n_max: u32) -> Result<FrameCodec> {
    let n = optimal_n(symbol_length, resolution, symbols_per_frame, n_max)?;
    FrameCodec::new(n, resolution, symbol_length, symbols_per_frame)
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => invalid(format!("invalid bit character {other:?}")),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Payload as an unsigned big-endian number in lowercase hex, zero-padded
/// to `ceil(len / 4)` digits. An empty payload gives an empty string.
pub fn bits_to_hex(bits: &[bool]) -> String {
    let digits = bits.len().div_ceil(4);
    let pad = digits * 4 - bits.len();
    let padded: Vec<bool> = std::iter::repeat_n(false, pad).chain(bits.iter().copied()).collect();
    padded
        .chunks(4)
        .map(|c| {
            let v = c.iter().fold(0_u32, |a, &b| (a << 1) | b as u32);
            char::from_digit(v, 16).unwrap()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn codec(n: u32, l: f64) -> FrameCodec {
        FrameCodec::new(n, 0.02, l, 4).unwrap()
    }

    #[test]
    fn t_min_values() {
        assert!((codec(3, 1.0).t_min() - 1.33).abs() < 1e-12);
        assert!((codec(4, 2.0).t_min() - 2.66).abs() < 1e-12);
        assert!((codec(2, 0.5).t_min() - 0.665).abs() < 1e-12);
    }

    #[test]
    fn offset_binary_groups() {
        let c = codec(3, 1.0);
        let iv = c.encode_intervals(&parse_bits("100000111").unwrap()).unwrap();
        assert!((iv[0] - 1.33).abs() < 1e-12);
        assert!((iv[1] - 1.25).abs() < 1e-12);
        assert!((iv[2] - 1.39).abs() < 1e-12);
        assert!(c.encode_intervals(&[true; 8]).is_err());
    }

    #[test]
    fn guard_rounding() {
        let c = codec(3, 1.0);
        let bits = parse_bits("101").unwrap();
        let iv = c.encode_intervals(&[bits.clone(), vec![false; 6]].concat()).unwrap()[0];
        assert_eq!(c.decode_intervals(&[iv + 0.009]).unwrap(), bits);
        assert_eq!(c.decode_intervals(&[iv - 0.009]).unwrap(), bits);
        assert_eq!(c.decode_intervals(&[iv + 0.011]).unwrap(), parse_bits("110").unwrap());
        assert!(c.decode_intervals(&[]).is_err());
    }

    #[test]
    fn clamps_outliers() {
        let c = codec(3, 1.0);
        assert_eq!(c.decode_intervals(&[0.1]).unwrap(), parse_bits("000").unwrap());
        assert_eq!(c.decode_intervals(&[9.0]).unwrap(), parse_bits("111").unwrap());
    }

    #[test]
    fn rates() {
        assert!((codec(3, 1.0).data_rate() - 73.0 / 4.99).abs() < 1e-12);
        assert!((codec(4, 2.0).data_rate() - 76.0 / 9.98).abs() < 1e-12);
        assert!((codec(1, 0.25).data_rate() - 67.0 / 1.2475).abs() < 1e-12);
        let single = FrameCodec::new(5, 0.02, 0.5, 1).unwrap();
        assert!((single.data_rate() - 32.0).abs() < 1e-12);
    }

    #[test]
    fn rate_optimal_n() {
        assert_eq!(optimal_n(1.0, 0.02, 4, 8).unwrap(), 3);
        assert_eq!(optimal_n(0.5, 0.02, 4, 8).unwrap(), 2);
        assert_eq!(optimal_n(2.0, 0.02, 4, 8).unwrap(), 4);
        let r = optimal_codec(0.5, 0.02, 4, 8).unwrap().data_rate();
        assert!((r - 28.056).abs() < 1e-3);
        assert!(optimal_n(1.0, 0.02, 4, 0).is_err());
    }

    #[test]
    fn schedule_spacing() {
        let sym = crate::symbolgen::VpwmSymbol::generate(crate::symbolgen::ApplianceId(1), 1.0, &crate::symbolgen::MotorProfile::default())
            .unwrap();
        let c = codec(3, 1.0);
        let s = c.schedule(&sym, &[false; 9], 2.0).unwrap();
        assert_eq!(s.start_times.len(), 4);
        for w in s.start_times.windows(2) {
            assert!((w[1] - w[0] - 1.25).abs() < 1e-12);
        }
        let two = FrameCodec::new(3, 0.02, 1.0, 2).unwrap();
        let s = two.schedule(&sym, &parse_bits("100").unwrap(), 0.5).unwrap();
        assert!((s.start_times[1] - 0.5 - two.t_min()).abs() < 1e-12);
    }

    #[test]
    fn hex_formatting() {
        assert_eq!(bits_to_hex(&parse_bits("100011111").unwrap()), "11f");
        assert_eq!(bits_to_hex(&parse_bits("0000").unwrap()), "0");
        assert_eq!(bits_to_hex(&[]), "");
    }

    proptest! {
        #[test]
        fn round_trip_with_guard_jitter(
            n in 1u32..=8,
            m in 2u32..=6,
            delta in 0.001f64..0.05,
            l in 0.05f64..3.0,
            seed in any::<u64>(),
        ) {
            let c = FrameCodec::new(n, delta, l, m).unwrap();
            let mut x = seed;
            let mut next = || { x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); x >> 11 };
            let bits: Vec<bool> = (0..c.payload_bits()).map(|_| next() & 1 == 1).collect();
            let iv: Vec<f64> = c.encode_intervals(&bits).unwrap().into_iter()
                .map(|t| t + ((next() as f64 / (1u64 << 53) as f64) - 0.5) * 0.98 * delta)
                .collect();
            prop_assert!(iv.iter().all(|&t| t >= c.min_interval() - 0.5 * delta));
            prop_assert_eq!(c.decode_intervals(&iv).unwrap(), bits);
        }

        #[test]
        fn rate_falls_with_symbol_length(n in 1u32..=6, m in 2u32..=6, l in 0.05f64..3.0) {
            let a = FrameCodec::new(n, 0.02, l, m).unwrap().data_rate();
            let b = FrameCodec::new(n, 0.02, l * 1.1, m).unwrap().data_rate();
            prop_assert!(b < a);
        }
    }
}
