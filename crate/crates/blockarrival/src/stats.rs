//! Inter-arrival statistics and goodness-of-fit testing.
//!
//! The centerpiece is an exponentiality test of the Lilliefors kind:
//! the KS statistic is computed against Exp(sample mean), and because
//! the mean was estimated from the same data the null distribution is
//! rebuilt by Monte-Carlo, re-estimating the mean in every replicate.
//! The p-value therefore has resolution 1/(n_mc+1) and is flagged when
//! it sits at that floor.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rate::RateFunction;
use crate::units::BLOCKS_PER_SEGMENT;

/// Sample moments of successive differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterarrivalSummary {
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator); 0 for a single gap.
    pub sd: f64,
    /// Number of gaps.
    pub n: usize,
    pub blocks_per_hour: f64,
}

/// Mean/sd of the gaps in an ordered time list. Negative gaps are
/// rejected unless `raw` is set; raw summaries of uncleaned data carry
/// moments inflated by timestamp noise.
pub fn interarrival_summary(times: &[f64], raw: bool) -> Result<InterarrivalSummary> {
    if times.len() < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 times, got {}",
            times.len()
        )));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut negatives = 0usize;
    for (i, w) in times.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap < 0.0 {
            negatives += 1;
        }
        let k = (i + 1) as f64;
        let d = gap - mean;
        mean += d / k;
        m2 += d * (gap - mean);
    }
    if negatives > 0 && !raw {
        return Err(Error::Structure(format!(
            "{negatives} negative gaps present; pass raw=true to keep them"
        )));
    }
    let n = times.len() - 1;
    let sd = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
    Ok(InterarrivalSummary {
        mean,
        sd,
        n,
        blocks_per_hour: 3600.0 / mean,
    })
}

/// Mean gap grouped by how far into its 2016-block segment the
/// arriving block sits (position 1 right after a difficulty change).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentProfile {
    pub position_means: Vec<f64>,
    pub counts: Vec<u64>,
}

impl SegmentProfile {
    /// Count-weighted mean over positions; equals the plain mean gap.
    pub fn overall_mean(&self) -> f64 {
        let mut total = 0.0;
        let mut count = 0u64;
        for (m, &c) in self.position_means.iter().zip(&self.counts) {
            if c > 0 {
                total += m * c as f64;
                count += c;
            }
        }
        total / count as f64
    }
}

/// `first_height` is the height of the block at `times[0]`; heights
/// divisible by 2016 start a fresh segment.
pub fn position_in_segment_profile(times: &[f64], first_height: u64) -> SegmentProfile {
    let seg = BLOCKS_PER_SEGMENT;
    let mut sums = vec![0.0; seg as usize];
    let mut counts = vec![0u64; seg as usize];
    for (i, w) in times.windows(2).enumerate() {
        let height = first_height + i as u64 + 1;
        let slot = ((height + seg - 1) % seg) as usize;
        sums[slot] += w[1] - w[0];
        counts[slot] += 1;
    }
    let position_means = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect();
    SegmentProfile { position_means, counts }
}

/// Right-continuous empirical survivor S(x) = fraction of gaps > x.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSurvivor {
    sorted: Vec<f64>,
}

impl EmpiricalSurvivor {
    pub fn new(gaps: &[f64]) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::Parameter("survivor needs at least one gap".into()));
        }
        let mut sorted = gaps.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalSurvivor { sorted })
    }

    pub fn value(&self, x: f64) -> f64 {
        let le = self.sorted.partition_point(|&g| g <= x);
        (self.sorted.len() - le) as f64 / self.sorted.len() as f64
    }

    /// (x, S(x)) at each distinct gap value, for plotting.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &x in &self.sorted {
            if out.last().map_or(true, |&(px, _)| px != x) {
                out.push((x, self.value(x)));
            }
        }
        out
    }
}

/// Replaces every gap above `threshold` with threshold + Exp(mean of
/// the whole sample); the memoryless conditioning of an exponential
/// above a cut. Sub-threshold entries are passed through untouched.
pub fn tail_resample(gaps: &[f64], threshold: f64, seed: u64) -> Result<Vec<f64>> {
    if !(threshold > 0.0) {
        return Err(Error::Parameter(format!("threshold {threshold} must be > 0")));
    }
    if gaps.is_empty() {
        return Err(Error::Parameter("no gaps to resample".into()));
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::Numeric(format!("sample mean {mean} unusable as a scale")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(gaps
        .iter()
        .map(|&g| {
            if g > threshold {
                threshold + mean * rng.sample::<f64, _>(Exp1)
            } else {
                g
            }
        })
        .collect())
}

/// Exact sup over order statistics of both one-sided gaps:
/// max_i max(i/n - F(x_i), F(x_i) - (i-1)/n).
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Test outcome with its Monte-Carlo provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub method: String,
    pub n_mc: u64,
    pub seed: u64,
    /// (α, reject at α) for the standard levels.
    pub decision_at: Vec<(f64, bool)>,
    /// True when no null replicate reached the observed statistic, so
    /// p is reported at its resolution floor 1/(n_mc+1).
    pub at_floor: bool,
}

/// KS test for exponentiality with the mean estimated from the data.
/// The null distribution is simulated: each replicate draws n
/// exponentials, re-estimates the mean, and recomputes the statistic.
pub fn lilliefors_exponential(sample: &[f64], n_mc: u64, seed: u64) -> Result<TestReport> {
    if sample.len() < 5 {
        return Err(Error::Parameter(format!(
            "need at least 5 observations, got {}",
            sample.len()
        )));
    }
    if n_mc < 999 {
        return Err(Error::Parameter(format!("n_mc {n_mc} below 999")));
    }
    let n = sample.len();
    let mean = sample.iter().sum::<f64>() / n as f64;
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::Numeric(format!("sample mean {mean} not positive")));
    }
    let spread = sample.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - sample.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(spread > 0.0) {
        return Err(Error::Structure("all observations equal".into()));
    }
    let observed = ks_statistic(sample, |x| exp_cdf(x, mean));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = vec![0.0f64; n];
    let mut at_least = 0u64;
    for _ in 0..n_mc {
        let mut total = 0.0;
        for d in draws.iter_mut() {
            *d = rng.sample(Exp1);
            total += *d;
        }
        let m = total / n as f64;
        let stat = ks_statistic(&draws, |x| exp_cdf(x, m));
        if stat >= observed {
            at_least += 1;
        }
    }
    let p_value = (1 + at_least) as f64 / (n_mc + 1) as f64;
    Ok(TestReport {
        statistic: observed,
        p_value,
        method: "ks-exponential-estimated-mean-mc".into(),
        n_mc,
        seed,
        decision_at: [0.1, 0.05, 0.01]
            .iter()
            .map(|&a| (a, p_value <= a))
            .collect(),
        at_floor: at_least == 0,
    })
}

fn exp_cdf(x: f64, mean: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x / mean).exp_m1()
    }
}

/// Gaps of the arrival list mapped through the cumulative intensity;
/// for a Poisson process with that intensity they are i.i.d. Exp(1).
pub fn time_rescaled_gaps(rate: &RateFunction, t0: f64, times: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(times.len());
    let mut prev = t0;
    for &t in times {
        out.push(rate.cumulative_intensity(prev, t)?);
        prev = t;
    }
    Ok(out)
}
