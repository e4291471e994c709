//! Modeling and simulation of the Bitcoin block-arrival point process.
//!
//! The pipeline runs: parse a block-header chain, flag and resample
//! unreliable timestamps, estimate the global hash rate (segment,
//! sliding-window, or kernel smoothed), fit exponential growth
//! regimes, derive the difficulty-adjustment dynamics they imply
//! (steady-state block times via a Lambert-W fixed point), simulate
//! arrivals as a nonhomogeneous Poisson process with optional
//! propagation delay, and test inter-arrival samples for
//! exponentiality.
//!
//! Times are Unix seconds throughout; hash rates are hashes per
//! second; difficulty follows the consensus convention where one
//! difficulty unit is 2^32 expected hashes per block.

pub mod chain;
pub mod cleaning;
pub mod delay;
pub mod difficulty;
pub mod error;
pub mod hashrate;
pub mod history;
pub mod numeric;
pub mod rate;
pub mod sampler;
pub mod simulate;
pub mod special;
pub mod stats;
pub mod units;

pub use chain::{parse_chain, BlockRecord, Chain, Provenance};
pub use cleaning::{clean_lr, CleaningReport, CleaningStrategy};
pub use delay::DelayModel;
pub use difficulty::{
    deterministic_schedule, next_difficulty, steady_block_time, steady_segment_time,
    DeterministicSchedule, DifficultyState, SteadyState,
};
pub use error::{Error, Result};
pub use hashrate::{
    delay_corrected_fit, fit_exponential, kernel_estimate, segment_hashrate, sliding_window,
    ExpFit, HashRateModel, HashRateSeries, Kernel,
};
pub use history::{growth_interval, GrowthInterval, GROWTH_INTERVALS};
pub use rate::{DifficultySteps, RateFunction};
pub use sampler::{sample_nhpp, ArrivalSample, SampleStop};
pub use simulate::{
    replicate, simulate, steady_start_difficulty, DifficultyMode, ReplicateSummary, SimConfig,
    SimResult,
};
pub use special::{
    expected_nth_arrival_exponential, expected_nth_arrival_linear, exponential_integral_ei,
    NthArrivalMean,
};
pub use stats::{
    interarrival_summary, ks_statistic, lilliefors_exponential, position_in_segment_profile,
    tail_resample, time_rescaled_gaps, EmpiricalSurvivor, InterarrivalSummary, SegmentProfile,
    TestReport,
};
pub use units::{Fortnights, PerFortnight, PerSecond};
