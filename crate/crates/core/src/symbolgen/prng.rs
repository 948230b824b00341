//! Seed expansion for appliance symbols.
//!
//! The generator is a split-mix stepper with fixed constants. Every
//! transmitter and receiver must produce the same period sequence from the
//! same appliance ID, so the algorithm is pinned here rather than borrowed
//! from a crate whose output could change between releases.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_2: u64 = 0x94D0_49BB_1331_11EB;

/// 2^64 as a float, used to map a 64-bit output onto `[0, 1)`.
const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
        z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
        z ^ (z >> 31)
    }

    /// Uniform draw as `u / 2^64`. Outputs within 2^10 of `u64::MAX` round
    /// up to exactly 1.0, so the range is closed.
    pub fn next_unit(&mut self) -> f64 {
        self.next_u64() as f64 / TWO_POW_64
    }
}

impl Iterator for SplitMix64 {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        Some(self.next_u64())
    }
}
