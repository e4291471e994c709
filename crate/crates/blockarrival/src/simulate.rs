//! Block-arrival simulation over the full model matrix: exponential or
//! empirical hash rate, random or deterministic difficulty, and any
//! delay model, plus a replication harness.
//!
//! Random difficulty retargets on realized segment durations (the 2016th
//! arrival closes a segment, and the new difficulty applies from the
//! next arrival onward). Deterministic difficulty switches at the
//! precomputed change times of the mean-path schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delay::DelayModel;
use crate::difficulty::{deterministic_schedule, next_difficulty, steady_block_time};
use crate::error::{Error, Result};
use crate::hashrate::HashRateModel;
use crate::rate::{DifficultySteps, RateFunction};
use crate::sampler::ArrivalStepper;
use crate::stats::interarrival_summary;
use crate::units::{PerSecond, BLOCKS_PER_SEGMENT, HASHES_PER_DIFFICULTY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DifficultyMode {
    /// Retarget on realized durations at every 2016th arrival.
    Random,
    /// Switch at the mean-path schedule's precomputed times.
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub hash_model: HashRateModel,
    pub difficulty_mode: DifficultyMode,
    pub delay: DelayModel,
    pub initial_difficulty: f64,
    pub start_time: f64,
    pub n_blocks: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub arrival_times: Vec<f64>,
    /// (change time, difficulty in force from the next arrival onward).
    pub difficulty_history: Vec<(f64, f64)>,
    pub config_echo: SimConfig,
    /// False when the hash-model domain ran out first; arrival_times
    /// then holds the partial run.
    pub complete: bool,
}

/// Difficulty that puts the first segment in steady state for the
/// exponential hash model H(t) = e^{a t + b}: the expected block time
/// at t0 equals the steady block time, so no retarget transient.
pub fn steady_start_difficulty(a: PerSecond, b: f64, t0: f64) -> Result<f64> {
    let block = steady_block_time(a)?;
    let d = (a.0 * t0 + b).exp() * block / HASHES_PER_DIFFICULTY;
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::Numeric(format!(
            "steady start difficulty came out {d} for a={}, b={b}, t0={t0}",
            a.0
        )));
    }
    Ok(d)
}

/// Runs one simulation. Bit-reproducible: identical config (seed
/// included) gives a byte-identical serialized result.
pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    validate(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match config.difficulty_mode {
        DifficultyMode::Random => simulate_random(config, &mut rng),
        DifficultyMode::Deterministic => simulate_deterministic(config, &mut rng),
    }
}

fn validate(config: &SimConfig) -> Result<()> {
    if !(config.initial_difficulty.is_finite() && config.initial_difficulty > 0.0) {
        return Err(Error::Parameter(format!(
            "initial difficulty {} must be > 0",
            config.initial_difficulty
        )));
    }
    if config.n_blocks == 0 {
        return Err(Error::Parameter("n_blocks must be >= 1".into()));
    }
    config.delay.validate()?;
    let (lo, hi) = config.hash_model.domain();
    if !(config.start_time >= lo && config.start_time < hi) {
        return Err(Error::Domain(format!(
            "start time {} outside hash model domain [{lo}, {hi})",
            config.start_time
        )));
    }
    Ok(())
}

/// Arrival rate for one segment at fixed difficulty: H(t)/(2^32 d),
/// wrapped in the delay model when there is one.
fn segment_rate(
    hash: &HashRateModel,
    d: f64,
    delay: DelayModel,
    last_event: f64,
) -> Result<RateFunction> {
    let base = match hash {
        HashRateModel::Exponential { a, b } => RateFunction::Exponential {
            a: *a,
            b: b - (HASHES_PER_DIFFICULTY * d).ln(),
        },
        HashRateModel::Empirical { series } => RateFunction::Empirical {
            series: series.clone(),
            difficulty: DifficultySteps::constant(d)?,
        },
    };
    Ok(match delay {
        DelayModel::None => base,
        _ => RateFunction::Delayed {
            base: Box::new(base),
            delay,
            last_event,
        },
    })
}

fn simulate_random(config: &SimConfig, rng: &mut ChaCha8Rng) -> Result<SimResult> {
    let n = config.n_blocks as usize;
    let seg = BLOCKS_PER_SEGMENT as usize;
    let mut times: Vec<f64> = Vec::with_capacity(n);
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut d = config.initial_difficulty;
    let mut seg_start = config.start_time;
    let mut prev = config.start_time;
    let mut anchor = config.start_time;
    let mut complete = true;
    'run: while times.len() < n {
        let rate = segment_rate(&config.hash_model, d, config.delay, anchor)?;
        let stepper = ArrivalStepper::new(&rate)?;
        loop {
            match stepper.next(prev, anchor, rng)? {
                None => {
                    complete = false;
                    break 'run;
                }
                Some(t) => {
                    times.push(t);
                    prev = t;
                    anchor = t;
                    if times.len() % seg == 0 {
                        d = next_difficulty(d, t - seg_start)?;
                        history.push((t, d));
                        seg_start = t;
                        break; // rate must be rebuilt with the new difficulty
                    }
                    if times.len() == n {
                        break 'run;
                    }
                }
            }
        }
    }
    Ok(SimResult {
        arrival_times: times,
        difficulty_history: history,
        config_echo: config.clone(),
        complete,
    })
}

fn simulate_deterministic(config: &SimConfig, rng: &mut ChaCha8Rng) -> Result<SimResult> {
    let n = config.n_blocks as usize;
    // one spare segment so the run almost never outlives the schedule;
    // past the last boundary the final difficulty stays in force
    let n_segments = n.div_ceil(BLOCKS_PER_SEGMENT as usize) + 1;
    let sched = deterministic_schedule(
        &config.hash_model,
        config.initial_difficulty,
        config.start_time,
        n_segments,
        &config.delay,
    )?;
    let mut times: Vec<f64> = Vec::with_capacity(n);
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut prev = config.start_time;
    let mut anchor = config.start_time;
    let mut complete = true;
    let mut j = 0usize;
    'run: while times.len() < n {
        let rate = segment_rate(&config.hash_model, sched.difficulty[j], config.delay, anchor)?;
        let stepper = ArrivalStepper::new(&rate)?;
        let boundary = if j + 1 < sched.segments() {
            sched.y_s[j + 1]
        } else {
            f64::INFINITY
        };
        loop {
            match stepper.next(prev, anchor, rng)? {
                None => {
                    complete = false;
                    break 'run;
                }
                // a draw past the boundary is discarded and retaken
                // under the next segment's rate, valid because the
                // underlying measure is independent across disjoint
                // intervals
                Some(t) if t >= boundary => {
                    prev = boundary;
                    j += 1;
                    history.push((boundary, sched.difficulty[j]));
                    continue 'run;
                }
                Some(t) => {
                    times.push(t);
                    prev = t;
                    anchor = t;
                    if times.len() == n {
                        break 'run;
                    }
                }
            }
        }
    }
    Ok(SimResult {
        arrival_times: times,
        difficulty_history: history,
        config_echo: config.clone(),
        complete,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub rep_means: Vec<f64>,
    pub rep_sds: Vec<f64>,
    /// Mean of the per-rep means.
    pub mean: f64,
    /// Mean of the per-rep standard deviations.
    pub sd: f64,
    /// 1.96 standard errors of the rep means (0 for a single rep).
    pub ci95_half_width: f64,
    pub n_reps: usize,
    pub incomplete_reps: usize,
}

/// Runs `n_reps` independent simulations and summarizes inter-arrival
/// means and standard deviations.
///
/// Seed splitting: rep i runs with seed splitmix64(base_seed + (i+1) *
/// 0x9E3779B97F4A7C15), so any rep can be reproduced standalone by
/// passing that seed to `simulate`. Reps run concurrently; aggregation
/// walks them in index order, so the summary is bit-stable.
pub fn replicate(config: &SimConfig, n_reps: usize, base_seed: u64) -> Result<ReplicateSummary> {
    if n_reps == 0 {
        return Err(Error::Parameter("n_reps must be >= 1".into()));
    }
    let per_rep: Vec<Result<(f64, f64, bool)>> = (0..n_reps)
        .into_par_iter()
        .map(|i| {
            let mut cfg = config.clone();
            cfg.seed = split_seed(base_seed, i as u64);
            let sim = simulate(&cfg)?;
            let mut with_origin = Vec::with_capacity(sim.arrival_times.len() + 1);
            with_origin.push(cfg.start_time);
            with_origin.extend_from_slice(&sim.arrival_times);
            let s = interarrival_summary(&with_origin, false)?;
            Ok((s.mean, s.sd, sim.complete))
        })
        .collect();
    let mut rep_means = Vec::with_capacity(n_reps);
    let mut rep_sds = Vec::with_capacity(n_reps);
    let mut incomplete = 0usize;
    for r in per_rep {
        let (m, s, done) = r?;
        rep_means.push(m);
        rep_sds.push(s);
        if !done {
            incomplete += 1;
        }
    }
    let k = n_reps as f64;
    let mean = rep_means.iter().sum::<f64>() / k;
    let sd = rep_sds.iter().sum::<f64>() / k;
    let ci95_half_width = if n_reps > 1 {
        let var = rep_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
        1.96 * (var / k).sqrt()
    } else {
        0.0
    };
    Ok(ReplicateSummary {
        rep_means,
        rep_sds,
        mean,
        sd,
        ci95_half_width,
        n_reps,
        incomplete_reps: incomplete,
    })
}

/// SplitMix64 finalizer over base + (i+1)·golden gamma.
fn split_seed(base: u64, i: u64) -> u64 {
    let mut z = base.wrapping_add((i + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
