//! Published growth regimes of the aggregate network hash rate.
//!
//! Between 2009 and late 2017 the network hash rate is well described
//! by a handful of exponential stretches e^{a t + b}, with breakpoints
//! where mining technology shifted (CPU, GPU, FPGA, ASIC generations).
//! These constants let callers simulate or predict a regime without
//! refitting from chain data; `fit_exponential` reproduces them from a
//! hash-rate series restricted to the same time window.

use crate::difficulty::SteadyState;
use crate::error::Result;
use crate::hashrate::HashRateModel;
use crate::units::PerSecond;

/// One exponential stretch of hash-rate history: H(t) = e^{a t + b}
/// for t in [start_epoch, end_epoch), t in seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthInterval {
    /// Conventional 1-based numbering of the regimes.
    pub index: usize,
    pub start_epoch: i64,
    pub end_epoch: i64,
    /// Growth rate per second.
    pub a: f64,
    /// Log hash rate extrapolated to epoch zero.
    pub b: f64,
}

impl GrowthInterval {
    pub fn model(&self) -> HashRateModel {
        HashRateModel::Exponential { a: self.a, b: self.b }
    }

    pub fn duration_s(&self) -> f64 {
        (self.end_epoch - self.start_epoch) as f64
    }

    pub fn hash_rate_at(&self, t: f64) -> f64 {
        (self.a * t + self.b).exp()
    }

    /// Where the difficulty feedback settles if this regime persisted.
    /// Errors for the shrinking regime (a < 0), which has no steady state.
    pub fn steady_state(&self) -> Result<SteadyState> {
        SteadyState::for_rate(PerSecond(self.a))
    }
}

/// The six regimes, contiguous from 2009-01-03 to 2017-11-24.
pub const GROWTH_INTERVALS: [GrowthInterval; 6] = [
    GrowthInterval { index: 1, start_epoch: 1_230_940_800, end_epoch: 1_262_131_200, a: -9.44e-9, b: 27.1 },
    GrowthInterval { index: 2, start_epoch: 1_262_131_200, end_epoch: 1_278_979_200, a: 2.18e-7, b: -259.0 },
    GrowthInterval { index: 3, start_epoch: 1_278_979_200, end_epoch: 1_308_873_600, a: 2.72e-7, b: -326.0 },
    GrowthInterval { index: 4, start_epoch: 1_308_873_600, end_epoch: 1_362_096_000, a: 2.01e-8, b: 3.38 },
    GrowthInterval { index: 5, start_epoch: 1_362_096_000, end_epoch: 1_412_812_800, a: 1.96e-7, b: -236.0 },
    GrowthInterval { index: 6, start_epoch: 1_412_812_800, end_epoch: 1_511_481_600, a: 3.88e-8, b: -15.1 },
];

pub fn growth_interval(index: usize) -> Option<&'static GrowthInterval> {
    GROWTH_INTERVALS.iter().find(|g| g.index == index)
}
