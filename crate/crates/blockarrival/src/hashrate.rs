//! Hash rate estimation from chain data.
//!
//! The global hash rate is unobservable; what the chain records is how
//! fast blocks actually came and at what difficulty. Every estimator
//! here is some form of (expected hashes per block) x (blocks) / (time):
//! per whole segments, over a sliding window of k blocks, or smoothed
//! with a weighted kernel. On top of those sit piecewise-exponential
//! fits and a propagation-delay correction.
//!
//! Conventions. Segment k covers heights [2016k, 2016k+2015]. A
//! segment's realized duration runs from the last block of the previous
//! segment to its own last block, which is exactly the span the
//! difficulty update divides by; that keeps the identity between the
//! segment estimate and the next difficulty exact.

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::units::{BLOCKS_PER_SEGMENT, HASHES_PER_DIFFICULTY};

/// Time-indexed hash rate samples with linear interpolation between
/// them. Evaluation outside the sampled range is a domain error, not
/// extrapolation: silent extrapolation corrupts downstream simulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashRateSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl HashRateSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Structure(format!(
                "series needs matching non-empty times/values, got {}/{}",
                times.len(),
                values.len()
            )));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Structure("sample times must strictly increase".into()));
        }
        if !values.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::Structure("values must be finite and positive".into()));
        }
        Ok(HashRateSeries { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        if t < self.start() || t > self.end() {
            return Err(Error::Domain(format!(
                "t={t} outside sampled range [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let idx = self.times.partition_point(|&x| x <= t);
        if idx == 0 {
            return Ok(self.values[0]);
        }
        if idx == self.times.len() {
            return Ok(*self.values.last().unwrap());
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    Rectangular,
    Gaussian,
    Epanechnikov,
}

impl Kernel {
    /// K(x); each kernel integrates to 1.
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Kernel::Rectangular => {
                if x.abs() < 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            Kernel::Gaussian => {
                (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
            }
            Kernel::Epanechnikov => {
                if x.abs() < 1.0 {
                    0.75 * (1.0 - x * x)
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius beyond which contributions are dropped. The Gaussian tail
    /// past 9 sigma is below 1e-18 and invisible at any tolerance used
    /// here.
    fn truncation_radius(self) -> f64 {
        match self {
            Kernel::Rectangular | Kernel::Epanechnikov => 1.0,
            Kernel::Gaussian => 9.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Kernel::Rectangular => "rectangular",
            Kernel::Gaussian => "gaussian",
            Kernel::Epanechnikov => "epanechnikov",
        }
    }
}

/// Exponential fit e^{a t + b} over a time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    /// Growth rate per second.
    pub a: f64,
    /// Log hashes per second at t = 0.
    pub b: f64,
    pub start: f64,
    pub end: f64,
}

impl ExpFit {
    pub fn value_at(&self, t: f64) -> f64 {
        (self.a * t + self.b).exp()
    }

    pub fn model(&self) -> HashRateModel {
        HashRateModel::Exponential { a: self.a, b: self.b }
    }
}

/// A hash rate as a function of time: parametric exponential or an
/// empirical interpolated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HashRateModel {
    Exponential { a: f64, b: f64 },
    Empirical { series: HashRateSeries },
}

impl HashRateModel {
    pub fn value_at(&self, t: f64) -> Result<f64> {
        match self {
            HashRateModel::Exponential { a, b } => Ok((a * t + b).exp()),
            HashRateModel::Empirical { series } => series.value_at(t),
        }
    }

    /// Inclusive time range the model can be evaluated on.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            HashRateModel::Exponential { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            HashRateModel::Empirical { series } => (series.start(), series.end()),
        }
    }
}

/// Whole-segment hash rate estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentEstimate {
    pub segment: u64,
    /// Timestamp anchoring the segment's duration (last block of the
    /// previous segment).
    pub start: i64,
    /// Timestamp of the segment's last block.
    pub end: i64,
    /// Hashes per second.
    pub value: f64,
}

/// Per-segment estimates: 2016 blocks' expected hashes over the
/// realized segment duration. Only segments whose 2016 records and
/// preceding anchor record are all present are estimated.
pub fn segment_hashrate(chain: &Chain) -> Result<Vec<SegmentEstimate>> {
    let records = chain.records();
    let first = chain.first_height();
    let last = first + records.len() as u64 - 1;
    let mut out = Vec::new();

    let seg_lo = first / BLOCKS_PER_SEGMENT + if first % BLOCKS_PER_SEGMENT == 0 { 0 } else { 1 };
    let mut seg = seg_lo.max(1); // segment 0 has no preceding anchor
    loop {
        let lead_in = seg * BLOCKS_PER_SEGMENT - 1; // last block of segment-1
        let seg_end = (seg + 1) * BLOCKS_PER_SEGMENT - 1;
        if seg_end > last {
            break;
        }
        if lead_in >= first {
            let anchor = records[(lead_in - first) as usize];
            let closer = records[(seg_end - first) as usize];
            let duration = (closer.time - anchor.time) as f64;
            if duration <= 0.0 {
                return Err(Error::Numeric(format!(
                    "segment {seg} has non-positive duration {duration}"
                )));
            }
            let d = closer.difficulty;
            out.push(SegmentEstimate {
                segment: seg,
                start: anchor.time,
                end: closer.time,
                value: BLOCKS_PER_SEGMENT as f64 * HASHES_PER_DIFFICULTY * d / duration,
            });
        }
        seg += 1;
    }
    if out.is_empty() {
        return Err(Error::Structure(
            "chain covers no complete segment with its preceding anchor".into(),
        ));
    }
    Ok(out)
}

/// Window geometry shared by the sliding estimators: for center index
/// i, the window spans record indices [i - floor(k/2), i + ceil(k/2)],
/// covering exactly k inter-arrival gaps and k mined blocks.
fn window_bounds(i: usize, k: usize, n: usize) -> Option<(usize, usize)> {
    let half_lo = k / 2;
    let half_hi = k - half_lo;
    if i < half_lo || i + half_hi > n - 1 {
        return None;
    }
    Some((i - half_lo, i + half_hi))
}

/// Sliding-window estimate: expected hashes of the k blocks mined in
/// the window divided by the window's time span, sampled at the span's
/// midpoint. Windows that do not fit, have non-positive span, or would
/// break the series' strictly-increasing sample times are omitted.
pub fn sliding_window(chain: &Chain, k: usize) -> Result<HashRateSeries> {
    if k < 2 {
        return Err(Error::Parameter(format!("window size {k} must be >= 2")));
    }
    let records = chain.records();
    let n = records.len();
    if n <= k {
        return Err(Error::Structure(format!(
            "chain of {n} records cannot fit a {k}-block window"
        )));
    }
    // prefix[j] = sum of difficulties of records [0, j)
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for r in records {
        prefix.push(prefix.last().unwrap() + r.difficulty);
    }

    let mut times = Vec::new();
    let mut values = Vec::new();
    for i in 0..n {
        let Some((lo, hi)) = window_bounds(i, k, n) else { continue };
        let span = (records[hi].time - records[lo].time) as f64;
        if span <= 0.0 {
            continue;
        }
        let t = 0.5 * (records[hi].time as f64 + records[lo].time as f64);
        if let Some(&prev) = times.last() {
            if t <= prev {
                continue;
            }
        }
        let diff_sum = prefix[hi + 1] - prefix[lo + 1];
        times.push(t);
        values.push(HASHES_PER_DIFFICULTY * diff_sum / span);
    }
    HashRateSeries::new(times, values)
}

/// Kernel-smoothed estimator: value_at(t) = (1/h) sum_i w_i K((t-X_i)/h)
/// with w_i = 2^32 D_i. Evaluates to 0 far from the data.
#[derive(Debug, Clone)]
pub struct KernelEstimator {
    times: Vec<f64>,
    weights: Vec<f64>,
    kernel: Kernel,
    h: f64,
}

pub fn kernel_estimate(chain: &Chain, kernel: Kernel, h: f64) -> Result<KernelEstimator> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Parameter(format!("bandwidth {h} must be > 0")));
    }
    let mut pairs: Vec<(f64, f64)> = chain
        .records()
        .iter()
        .map(|r| (r.time as f64, HASHES_PER_DIFFICULTY * r.difficulty))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (times, weights) = pairs.into_iter().unzip();
    Ok(KernelEstimator {
        times,
        weights,
        kernel,
        h,
    })
}

impl KernelEstimator {
    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let radius = self.h * self.kernel.truncation_radius();
        let lo = self.times.partition_point(|&x| x < t - radius);
        let hi = self.times.partition_point(|&x| x <= t + radius);
        let mut sum = 0.0;
        for j in lo..hi {
            sum += self.weights[j] * self.kernel.eval((t - self.times[j]) / self.h);
        }
        sum / self.h
    }

    /// Data span, for choosing evaluation grids.
    pub fn data_range(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }
}

/// Ordinary least squares on log(value) vs time over samples inside
/// [start, end]. Times are centered before regression; the quoted b is
/// relative to t = 0.
pub fn fit_exponential(series: &HashRateSeries, start: f64, end: f64) -> Result<ExpFit> {
    let pts: Vec<(f64, f64)> = series
        .times()
        .iter()
        .zip(series.values())
        .filter(|(t, _)| **t >= start && **t <= end)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Numeric(format!(
            "need >= 2 samples in [{start}, {end}], found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, y) in &pts {
        let dt = t - mean_t;
        sxx += dt * dt;
        sxy += dt * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::Numeric("all samples share one time; slope undefined".into()));
    }
    let a = sxy / sxx;
    let b = mean_y - a * mean_t;
    Ok(ExpFit { a, b, start, end })
}

/// Delay-corrected sliding-window estimate.
///
/// Under the ramp delay model, the work a gap of length delta actually
/// represents is shortened: treating the rate as locally constant, the
/// effective gap is delta - (1 - e^{-c delta})/c (each arrival costs
/// about one ramp time constant). Windows aggregate expected hashes
/// over effective time instead of wall time; geometry and sample times
/// match `sliding_window`, so c -> infinity recovers it.
pub fn delay_corrected_fit(chain: &Chain, c: f64, k: usize) -> Result<HashRateSeries> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Parameter(format!("delay rate {c} must be > 0")));
    }
    if k < 2 {
        return Err(Error::Parameter(format!("window size {k} must be >= 2")));
    }
    let records = chain.records();
    let n = records.len();
    if n <= k {
        return Err(Error::Structure(format!(
            "chain of {n} records cannot fit a {k}-block window"
        )));
    }
    let mut diff_prefix = Vec::with_capacity(n + 1);
    diff_prefix.push(0.0);
    // eff_prefix[j] = summed effective gap lengths of gaps ending at records [1, j]
    let mut eff_prefix = Vec::with_capacity(n + 1);
    eff_prefix.push(0.0);
    eff_prefix.push(0.0); // no gap ends at record 0
    for (i, r) in records.iter().enumerate() {
        diff_prefix.push(diff_prefix.last().unwrap() + r.difficulty);
        if i >= 1 {
            let delta = (r.time - records[i - 1].time) as f64;
            let eff = if delta <= 0.0 {
                f64::NAN // disordered input; windows touching it are dropped
            } else {
                delta + (-c * delta).exp_m1() / c
            };
            eff_prefix.push(eff_prefix.last().unwrap() + eff);
        }
    }

    let mut times = Vec::new();
    let mut values = Vec::new();
    for i in 0..n {
        let Some((lo, hi)) = window_bounds(i, k, n) else { continue };
        let eff_span = eff_prefix[hi + 1] - eff_prefix[lo + 1];
        if !(eff_span > 0.0) {
            continue;
        }
        let t = 0.5 * (records[hi].time as f64 + records[lo].time as f64);
        if let Some(&prev) = times.last() {
            if t <= prev {
                continue;
            }
        }
        let diff_sum = diff_prefix[hi + 1] - diff_prefix[lo + 1];
        times.push(t);
        values.push(HASHES_PER_DIFFICULTY * diff_sum / eff_span);
    }
    HashRateSeries::new(times, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{BlockRecord, Provenance};
    use crate::numeric::integrate;
    use crate::units::TARGET_BLOCK_TIME_S;
    use approx::assert_relative_eq;

    /// Chain with fixed gap length; first block lands one gap after t0=0.
    fn uniform_chain(n: usize, gap: i64, difficulty: f64) -> Chain {
        let records = (0..n)
            .map(|h| BlockRecord {
                height: h as u64,
                time: gap * (h as i64 + 1),
                difficulty,
            })
            .collect();
        Chain::new(records, Provenance::Synthetic).unwrap()
    }

    #[test]
    fn segment_estimate_at_design_rate() {
        let chain = uniform_chain(2 * 2016, 600, 1.0);
        let est = segment_hashrate(&chain).unwrap();
        assert_eq!(est.len(), 1);
        assert_eq!(est[0].segment, 1);
        // 2016 blocks over a fortnight at difficulty 1
        assert_relative_eq!(est[0].value, 7_158_278.826_666_667, max_relative = 1e-12);

        let fast = uniform_chain(2 * 2016, 300, 1.0);
        let est2 = segment_hashrate(&fast).unwrap();
        assert_relative_eq!(est2[0].value, 2.0 * est[0].value, max_relative = 1e-12);
    }

    #[test]
    fn segment_estimate_tracks_difficulty_recursion() {
        // difficulties follow the retarget rule; the segment estimate
        // must then equal (2^32/600) * next difficulty
        let mut records = Vec::new();
        let mut d = 3.0;
        let mut t = 0i64;
        let mut seg_anchor = 0i64;
        let mut next_d = d;
        for h in 0..(4 * 2016u64) {
            let gap = 500 + ((h * 37) % 211) as i64;
            t += gap;
            records.push(BlockRecord { height: h, time: t, difficulty: d });
            if (h + 1) % 2016 == 0 {
                let duration = (t - seg_anchor) as f64;
                next_d = crate::difficulty::next_difficulty(d, duration).unwrap();
                seg_anchor = t;
                d = next_d;
            }
        }
        let chain = Chain::new(records, Provenance::Synthetic).unwrap();
        let est = segment_hashrate(&chain).unwrap();
        assert_eq!(est.len(), 3);
        let chain_d: Vec<f64> = chain.records().iter().map(|r| r.difficulty).collect();
        for e in &est {
            let d_next = if e.segment + 1 < 4 {
                chain_d[((e.segment + 1) * 2016) as usize]
            } else {
                next_d
            };
            assert_relative_eq!(
                e.value,
                HASHES_PER_DIFFICULTY / TARGET_BLOCK_TIME_S * d_next,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn sliding_window_constant_rate() {
        let chain = uniform_chain(1000, 600, 1.0);
        let series = sliding_window(&chain, 144).unwrap();
        assert_eq!(series.len(), 1000 - 144);
        for &v in series.values() {
            assert_relative_eq!(v, 7_158_278.826_666_667, max_relative = 1e-9);
        }
        // sample times sit at window midpoints
        assert_eq!(series.times()[0], 600.0 * (1.0 + 145.0) / 2.0);
    }

    #[test]
    fn sliding_window_matches_constant_difficulty_closed_form() {
        let mut records = Vec::new();
        let mut t = 0i64;
        for h in 0..500u64 {
            t += 400 + ((h * 53) % 331) as i64;
            records.push(BlockRecord { height: h, time: t, difficulty: 3.0 });
        }
        let chain = Chain::new(records, Provenance::Synthetic).unwrap();
        let k = 100;
        let series = sliding_window(&chain, k).unwrap();
        let recs = chain.records();
        for (idx, (&t, &v)) in series.times().iter().zip(series.values()).enumerate() {
            let i = idx + k / 2;
            let (lo, hi) = (i - k / 2, i + (k - k / 2));
            assert_eq!(t, 0.5 * (recs[hi].time as f64 + recs[lo].time as f64));
            let span = (recs[hi].time - recs[lo].time) as f64;
            assert_eq!(v, HASHES_PER_DIFFICULTY * 3.0 * k as f64 / span);
        }
    }

    #[test]
    fn sliding_window_rejects_bad_parameters() {
        let chain = uniform_chain(100, 600, 1.0);
        assert!(sliding_window(&chain, 1).is_err());
        assert!(sliding_window(&chain, 100).is_err());
        assert!(sliding_window(&chain, 99).is_ok());
    }

    #[test]
    fn kernel_values_and_mass() {
        for k in [Kernel::Rectangular, Kernel::Gaussian, Kernel::Epanechnikov] {
            let mass = integrate(&|x| k.eval(x), -9.0, 9.0, 1e-12);
            assert_relative_eq!(mass, 1.0, max_relative = 1e-8);
        }
        assert_eq!(Kernel::Rectangular.eval(0.3), 0.5);
        assert_eq!(Kernel::Epanechnikov.eval(1.0), 0.0);
        assert_relative_eq!(Kernel::Epanechnikov.eval(0.0), 0.75, max_relative = 1e-15);
    }

    #[test]
    fn kernel_estimator_single_block() {
        let chain = Chain::new(
            vec![BlockRecord { height: 0, time: 0, difficulty: 1.0 }],
            Provenance::Synthetic,
        )
        .unwrap();
        let est = kernel_estimate(&chain, Kernel::Rectangular, 600.0).unwrap();
        assert_relative_eq!(est.value_at(0.0), 3_579_139.413_333_333, max_relative = 1e-12);
        let epan = kernel_estimate(&chain, Kernel::Epanechnikov, 600.0).unwrap();
        assert_eq!(epan.value_at(600.0), 0.0);
        assert_eq!(epan.value_at(-10_000.0), 0.0);
    }

    #[test]
    fn kernel_estimator_total_mass_counts_all_weights() {
        let chain = uniform_chain(5, 600, 2.5);
        let expected = HASHES_PER_DIFFICULTY * 2.5 * 5.0;
        for k in [Kernel::Rectangular, Kernel::Gaussian, Kernel::Epanechnikov] {
            let est = kernel_estimate(&chain, k, 700.0).unwrap();
            let (lo, hi) = est.data_range();
            let mass = integrate(&|t| est.value_at(t), lo - 7000.0, hi + 7000.0, 1e-10);
            assert_relative_eq!(mass, expected, max_relative = 1e-6);
        }
    }

    #[test]
    fn smoothing_grows_with_bandwidth() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut t = 0i64;
        let records: Vec<BlockRecord> = (0..800u64)
            .map(|h| {
                t += rng.gen_range(200..1000);
                BlockRecord { height: h, time: t, difficulty: 1.0 }
            })
            .collect();
        let chain = Chain::new(records, Provenance::Synthetic).unwrap();
        let grid: Vec<f64> = (0..200).map(|i| 60_000.0 + 2000.0 * i as f64).collect();
        let variance_at = |h: f64| {
            let est = kernel_estimate(&chain, Kernel::Epanechnikov, h).unwrap();
            let vals: Vec<f64> = grid.iter().map(|&g| est.value_at(g)).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (vals.len() - 1) as f64
        };
        let (v_small, v_mid, v_big) = (variance_at(2_000.0), variance_at(10_000.0), variance_at(50_000.0));
        assert!(v_big < v_mid && v_mid < v_small, "{v_small} {v_mid} {v_big}");
    }

    #[test]
    fn wider_windows_average_out_jitter() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut all_144 = Vec::new();
        let mut all_2016 = Vec::new();
        for _ in 0..100 {
            let mut t = 0i64;
            let records: Vec<BlockRecord> = (0..3 * 2016u64)
                .map(|h| {
                    t += rng.gen_range(100..1100); // white-noise gaps, mean 600
                    BlockRecord { height: h, time: t, difficulty: 1.0 }
                })
                .collect();
            let chain = Chain::new(records, Provenance::Synthetic).unwrap();
            all_144.extend_from_slice(sliding_window(&chain, 144).unwrap().values());
            all_2016.extend_from_slice(sliding_window(&chain, 2016).unwrap().values());
        }
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
        };
        assert!(
            var(&all_2016) < var(&all_144),
            "wide {} vs narrow {}",
            var(&all_2016),
            var(&all_144)
        );
    }

    #[test]
    fn sliding_and_rectangular_kernel_agree_on_constant_rate() {
        let chain = uniform_chain(600, 600, 1.0);
        let k = 144;
        let series = sliding_window(&chain, k).unwrap();
        let h = (k as f64 * 600.0) / 2.0;
        let est = kernel_estimate(&chain, Kernel::Rectangular, h).unwrap();
        for (&t, &v) in series.times().iter().zip(series.values()) {
            let kv = est.value_at(t);
            assert!((kv - v).abs() / v < 0.2, "t={t} window={v} kernel={kv}");
        }
    }

    #[test]
    fn estimators_scale_linearly_in_difficulty() {
        let base = uniform_chain(3 * 2016, 550, 2.0);
        let doubled = Chain::new(
            base.records()
                .iter()
                .map(|r| BlockRecord { difficulty: r.difficulty * 2.0, ..*r })
                .collect(),
            Provenance::Synthetic,
        )
        .unwrap();

        let s1 = segment_hashrate(&base).unwrap();
        let s2 = segment_hashrate(&doubled).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert_relative_eq!(2.0 * a.value, b.value, max_relative = 1e-12);
        }

        let w1 = sliding_window(&base, 144).unwrap();
        let w2 = sliding_window(&doubled, 144).unwrap();
        for (a, b) in w1.values().iter().zip(w2.values()) {
            assert_relative_eq!(2.0 * a, *b, max_relative = 1e-12);
        }

        let k1 = kernel_estimate(&base, Kernel::Gaussian, 5000.0).unwrap();
        let k2 = kernel_estimate(&doubled, Kernel::Gaussian, 5000.0).unwrap();
        assert_relative_eq!(
            2.0 * k1.value_at(200_000.0),
            k2.value_at(200_000.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        let times: Vec<f64> = (0..100).map(|i| 1.3e9 + 1.0e5 * i as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| (2.0e-7 * t - 100.0).exp()).collect();
        let series = HashRateSeries::new(times, values).unwrap();
        let fit = fit_exponential(&series, 1.2e9, 1.4e9).unwrap();
        assert_relative_eq!(fit.a, 2.0e-7, max_relative = 1e-9);
        assert_relative_eq!(fit.b, -100.0, max_relative = 1e-9);
    }

    #[test]
    fn fit_constant_series_has_zero_slope() {
        let times: Vec<f64> = (0..50).map(|i| 1000.0 * i as f64).collect();
        let values = vec![42.0; 50];
        let series = HashRateSeries::new(times, values).unwrap();
        let fit = fit_exponential(&series, 0.0, 1e9).unwrap();
        assert!(fit.a.abs() < 1e-15);
        assert_relative_eq!(fit.b, 42.0f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn fit_needs_two_distinct_samples() {
        let series = HashRateSeries::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(fit_exponential(&series, 0.5, 0.9).is_err());
        assert!(fit_exponential(&series, 0.0, 0.5).is_err());
    }

    #[test]
    fn delay_correction_vanishes_for_instant_propagation() {
        let chain = uniform_chain(800, 600, 1.5);
        let plain = sliding_window(&chain, 144).unwrap();
        let corrected = delay_corrected_fit(&chain, 1e9, 144).unwrap();
        assert_eq!(plain.len(), corrected.len());
        for (a, b) in plain.values().iter().zip(corrected.values()) {
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
        assert!(delay_corrected_fit(&chain, 0.0, 144).is_err());
    }

    #[test]
    fn delay_correction_raises_estimate_above_uncorrected() {
        // with real delay, wall-clock spans overstate effective time,
        // so the corrected rate must exceed the plain one
        let chain = uniform_chain(800, 600, 1.5);
        let c = std::f64::consts::LN_2 / 20.0; // 20 s median delay
        let plain = sliding_window(&chain, 144).unwrap();
        let corrected = delay_corrected_fit(&chain, c, 144).unwrap();
        for (a, b) in plain.values().iter().zip(corrected.values()) {
            assert!(b > a);
            // each 600 s gap loses about 1/c of effective time
            assert_relative_eq!(b / a, 600.0 / (600.0 - 1.0 / c), max_relative = 1e-6);
        }
    }

    #[test]
    fn series_interpolates_and_guards_domain() {
        let s = HashRateSeries::new(vec![0.0, 10.0], vec![1.0, 3.0]).unwrap();
        assert_relative_eq!(s.value_at(5.0).unwrap(), 2.0, max_relative = 1e-15);
        assert_eq!(s.value_at(0.0).unwrap(), 1.0);
        assert_eq!(s.value_at(10.0).unwrap(), 3.0);
        assert!(s.value_at(-0.1).is_err());
        assert!(s.value_at(10.1).is_err());
        assert!(HashRateSeries::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(HashRateSeries::new(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
    }
}
