//! Protocol constants and thin unit tags.
//!
//! Growth rates appear in two natural time bases. Estimation works per
//! second (timestamps are epoch seconds); the retarget recursion is
//! cleanest per fortnight (the design duration of one segment). Mixing
//! them up is a silent factor of 1,209,600, so the difficulty API takes
//! tagged values instead of bare floats.

use serde::{Deserialize, Serialize};

/// Blocks per difficulty segment.
pub const BLOCKS_PER_SEGMENT: u64 = 2016;

/// Design duration of one segment, in seconds (2016 blocks at 600 s).
pub const SECONDS_PER_FORTNIGHT: f64 = 1_209_600.0;

/// Design inter-arrival time, in seconds.
pub const TARGET_BLOCK_TIME_S: f64 = 600.0;

/// Expected hashes per block at difficulty 1 (2^32).
pub const HASHES_PER_DIFFICULTY: f64 = 4_294_967_296.0;

/// Exponential growth rate in 1/seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerSecond(pub f64);

/// Exponential growth rate in 1/fortnights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerFortnight(pub f64);

/// Duration measured in fortnights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fortnights(pub f64);

impl PerSecond {
    pub fn per_fortnight(self) -> PerFortnight {
        PerFortnight(self.0 * SECONDS_PER_FORTNIGHT)
    }
}

impl PerFortnight {
    pub fn per_second(self) -> PerSecond {
        PerSecond(self.0 / SECONDS_PER_FORTNIGHT)
    }
}

impl Fortnights {
    pub fn seconds(self) -> f64 {
        self.0 * SECONDS_PER_FORTNIGHT
    }
}
