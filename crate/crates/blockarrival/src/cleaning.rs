//! Timestamp cleaning.
//!
//! Header timestamps are self-reported and out-of-order arrivals are
//! common in the early chain. The strategies here range from doing
//! nothing, through sorting, to the one actually used to build the
//! cleaned reference dataset: keep the timestamps that every longest
//! non-decreasing subsequence agrees on, and redraw the rest uniformly
//! between their nearest reliable neighbors.
//!
//! "Increasing" is treated as non-strict throughout: timestamps have
//! one-second resolution and legitimate ties occur.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{Chain, Provenance};
use crate::error::{Error, Result};

/// 2009-12-30 00:00:00 UTC, the reference dataset's cutoff.
pub const LR_CUTOFF_EPOCH: i64 = 1_262_131_200;

const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CleaningStrategy {
    /// Keep everything as-is (baseline for comparison runs).
    Ignore,
    /// Stable-sort the timestamps, leaving heights in place (baseline).
    Reorder,
    /// Flag both neighbors of every negative inter-arrival.
    ResampleAdjacentNegative,
    /// Flag every element whose rank changes under a stable sort.
    ResampleSortDisplacement,
    /// Flag the complement of the intersection of all longest
    /// non-decreasing subsequences.
    ResampleLisIntersection,
}

impl CleaningStrategy {
    pub fn label(self) -> &'static str {
        match self {
            CleaningStrategy::Ignore => "ignore",
            CleaningStrategy::Reorder => "reorder",
            CleaningStrategy::ResampleAdjacentNegative => "resample-adjacent-negative",
            CleaningStrategy::ResampleSortDisplacement => "resample-sort-displacement",
            CleaningStrategy::ResampleLisIntersection => "resample-lis-intersection",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CleaningReport {
    pub strategy: CleaningStrategy,
    /// Generator family; together with `seed` this makes runs bit-reproducible.
    pub rng: String,
    pub seed: u64,
    /// Heights flagged unreliable (after boundary anchoring).
    pub unreliable: BTreeSet<u64>,
    /// Height -> redrawn timestamp.
    pub resampled: BTreeMap<u64, i64>,
}

impl CleaningReport {
    fn empty(strategy: CleaningStrategy, seed: u64) -> Self {
        CleaningReport {
            strategy,
            rng: RNG_ALGORITHM.into(),
            seed,
            unreliable: BTreeSet::new(),
            resampled: BTreeMap::new(),
        }
    }
}

/// Length of the longest non-decreasing subsequence ending at each
/// element. Patience lengths: tails[k] holds the smallest tail value of
/// any non-decreasing subsequence of length k+1 seen so far.
fn nondecreasing_prefix_lengths(values: &[i64]) -> Vec<usize> {
    let mut tails: Vec<i64> = Vec::new();
    values
        .iter()
        .map(|&x| {
            let pos = tails.partition_point(|&t| t <= x);
            if pos == tails.len() {
                tails.push(x);
            } else {
                tails[pos] = x;
            }
            pos + 1
        })
        .collect()
}

/// Reliability flags: `true` iff the element belongs to every longest
/// non-decreasing subsequence.
///
/// An element is on some LIS iff prefix + suffix run lengths through it
/// add to the LIS length. It is on every LIS iff, additionally, it is
/// the only on-some-LIS element with its prefix length: two members of
/// one rank class can never co-occur in a single LIS, so a class of two
/// means each is avoidable.
pub fn lis_intersection(values: &[i64]) -> Vec<bool> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let pre = nondecreasing_prefix_lengths(values);
    let neg_rev: Vec<i64> = values.iter().rev().map(|&v| -v).collect();
    let suf_rev = nondecreasing_prefix_lengths(&neg_rev);
    let lis_len = *pre.iter().max().unwrap();

    let on_some: Vec<bool> = (0..n)
        .map(|i| pre[i] + suf_rev[n - 1 - i] - 1 == lis_len)
        .collect();
    let mut class_count = vec![0usize; lis_len + 1];
    for i in 0..n {
        if on_some[i] {
            class_count[pre[i]] += 1;
        }
    }
    (0..n)
        .map(|i| on_some[i] && class_count[pre[i]] == 1)
        .collect()
}

/// Heights flagged unreliable under `strategy`. The baselines flag
/// nothing. Boundary anchoring is the pipeline's job, not this one's:
/// the sets returned here are the strategies' raw answers.
pub fn flag_unreliable(chain: &Chain, strategy: CleaningStrategy) -> BTreeSet<u64> {
    let first = chain.first_height();
    let times: Vec<i64> = chain.times().collect();
    let mut flags = BTreeSet::new();
    match strategy {
        CleaningStrategy::Ignore | CleaningStrategy::Reorder => {}
        CleaningStrategy::ResampleAdjacentNegative => {
            for i in 1..times.len() {
                if times[i] < times[i - 1] {
                    flags.insert(first + (i - 1) as u64);
                    flags.insert(first + i as u64);
                }
            }
        }
        CleaningStrategy::ResampleSortDisplacement => {
            let mut order: Vec<usize> = (0..times.len()).collect();
            order.sort_by_key(|&i| times[i]); // stable: ties keep original order
            for (rank, &i) in order.iter().enumerate() {
                if rank != i {
                    flags.insert(first + i as u64);
                }
            }
        }
        CleaningStrategy::ResampleLisIntersection => {
            for (i, reliable) in lis_intersection(&times).iter().enumerate() {
                if !reliable {
                    flags.insert(first + i as u64);
                }
            }
        }
    }
    flags
}

/// Redraws every flagged timestamp uniformly between its nearest
/// unflagged neighbors.
///
/// Each maximal flagged run between anchors (lo, hi) gets run-length
/// i.i.d. uniform integers from the open interval, sorted ascending.
/// When the anchors leave no interior integer (hi - lo < 2) the draw
/// falls back to the closed interval; output monotonicity still holds.
/// Draws are consumed in ascending height order, so results are
/// bit-reproducible given the seed.
pub fn resample_flagged(
    chain: &Chain,
    flags: &BTreeSet<u64>,
    seed: u64,
    strategy: CleaningStrategy,
) -> Result<(Chain, CleaningReport)> {
    let first = chain.first_height();
    let last = first + chain.len() as u64 - 1;
    for &h in flags {
        if h < first || h > last {
            return Err(Error::Parameter(format!(
                "flagged height {h} outside chain [{first}, {last}]"
            )));
        }
        if h == first || h == last {
            return Err(Error::Parameter(format!(
                "boundary record {h} flagged; boundaries anchor the resampling"
            )));
        }
    }

    let mut records = chain.records().to_vec();
    let mut report = CleaningReport::empty(strategy, seed);
    report.unreliable = flags.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let flagged: Vec<usize> = flags.iter().map(|&h| (h - first) as usize).collect();
    let mut run_start = 0;
    while run_start < flagged.len() {
        let mut run_end = run_start;
        while run_end + 1 < flagged.len() && flagged[run_end + 1] == flagged[run_end] + 1 {
            run_end += 1;
        }
        let s = flagged[run_start];
        let e = flagged[run_end];
        let lo = records[s - 1].time;
        let hi = records[e + 1].time;
        if lo > hi {
            return Err(Error::Structure(format!(
                "anchors around heights {}..={} are out of order ({lo} > {hi}); \
                 this strategy cannot bracket the run",
                first + s as u64,
                first + e as u64
            )));
        }
        let (draw_lo, draw_hi) = if hi - lo >= 2 { (lo + 1, hi - 1) } else { (lo, hi) };
        let mut draws: Vec<i64> = (s..=e).map(|_| rng.gen_range(draw_lo..=draw_hi)).collect();
        draws.sort_unstable();
        for (idx, t) in (s..=e).zip(draws) {
            records[idx].time = t;
            report.resampled.insert(first + idx as u64, t);
        }
        run_start = run_end + 1;
    }

    let out = Chain::new(records, chain.provenance())?;
    Ok((out, report))
}

/// Full cleaning pipeline: cut to the records from the first timestamp
/// at or past `cutoff` (a prefix cut, so heights stay contiguous even
/// when stragglers near the boundary are out of order), flag with the
/// chosen strategy, anchor the boundaries, resample, and retag.
pub fn clean_with_strategy(
    chain: &Chain,
    strategy: CleaningStrategy,
    cutoff: i64,
    seed: u64,
) -> Result<(Chain, CleaningReport)> {
    let start = chain
        .records()
        .iter()
        .position(|r| r.time >= cutoff)
        .ok_or_else(|| Error::Structure(format!("every record is before cutoff {cutoff}")))?;
    let kept = Chain::new(chain.records()[start..].to_vec(), chain.provenance())?;

    match strategy {
        CleaningStrategy::Ignore => Ok((kept, CleaningReport::empty(strategy, seed))),
        CleaningStrategy::Reorder => {
            let mut times: Vec<i64> = kept.times().collect();
            times.sort_unstable();
            let records = kept
                .records()
                .iter()
                .zip(times)
                .map(|(r, t)| crate::chain::BlockRecord { time: t, ..*r })
                .collect();
            let sorted = Chain::new(records, kept.provenance())?;
            Ok((sorted, CleaningReport::empty(strategy, seed)))
        }
        _ => {
            let mut flags = flag_unreliable(&kept, strategy);
            // boundary anchoring: first and last records are kept as-is
            flags.remove(&kept.first_height());
            flags.remove(&(kept.first_height() + kept.len() as u64 - 1));
            let (resampled, report) = resample_flagged(&kept, &flags, seed, strategy)?;
            let cleaned = Chain::new(resampled.records().to_vec(), Provenance::CleanedLr)?;
            Ok((cleaned, report))
        }
    }
}

/// The reference cleaning: prefix cut at the standard cutoff date,
/// LIS-intersection flags, uniform resampling. Output timestamps are
/// non-decreasing.
pub fn clean_lr(chain: &Chain, cutoff: i64, seed: u64) -> Result<(Chain, CleaningReport)> {
    clean_with_strategy(chain, CleaningStrategy::ResampleLisIntersection, cutoff, seed)
}
