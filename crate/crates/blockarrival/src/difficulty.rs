//! Difficulty adjustment dynamics.
//!
//! The retarget rule D' = 1,209,600 D / (segment duration) is a
//! feedback loop: growing hash rate shortens segments, which raises
//! difficulty, which stretches them back out. With exponential growth
//! e^{a t} the loop settles into a steady state whose segment duration
//! (in fortnights) solves e^{a δ} δ = 1, i.e. δ* = W(a)/a with a per
//! fortnight. This module carries the update arithmetic, the fixed
//! point machinery, the steady-state roots per second, and the
//! deterministic segment schedule that replaces random arrivals with
//! their expectation.

use serde::Serialize;

use crate::delay::DelayModel;
use crate::error::{Error, Result};
use crate::hashrate::HashRateModel;
use crate::numeric::{bisect, integrate, lambert_w};
use crate::units::{
    Fortnights, PerFortnight, PerSecond, BLOCKS_PER_SEGMENT, HASHES_PER_DIFFICULTY,
    SECONDS_PER_FORTNIGHT, TARGET_BLOCK_TIME_S,
};

/// Difficulty in force over one segment, with the bookkeeping needed to
/// advance it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifficultyState {
    pub segment_index: u64,
    pub difficulty: f64,
    /// When this segment's clock started (the previous segment's close).
    pub segment_start_time: f64,
}

impl DifficultyState {
    /// Hash threshold equivalent to this difficulty (2^224 / D).
    pub fn target(&self) -> f64 {
        2f64.powi(224) / self.difficulty
    }

    /// Close this segment at `segment_end_time` and enter the next one.
    pub fn advance(&self, segment_end_time: f64) -> Result<DifficultyState> {
        let next = next_difficulty(self.difficulty, segment_end_time - self.segment_start_time)?;
        Ok(DifficultyState {
            segment_index: self.segment_index + 1,
            difficulty: next,
            segment_start_time: segment_end_time,
        })
    }
}

/// Retarget arithmetic: 1,209,600 * d / segment_duration.
pub fn next_difficulty(d: f64, segment_duration_s: f64) -> Result<f64> {
    if !(segment_duration_s.is_finite() && segment_duration_s > 0.0) {
        return Err(Error::Numeric(format!(
            "segment duration {segment_duration_s} must be positive"
        )));
    }
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::Parameter(format!("difficulty {d} must be positive")));
    }
    Ok(SECONDS_PER_FORTNIGHT * d / segment_duration_s)
}

/// One application of the segment-duration recursion
/// f(δ) = (1/a) log((e^{aδ}-1)/(e^{aδ}δ) + 1), everything in fortnights.
/// Written with expm1 so small a·δ does not cancel:
/// (e^{aδ}-1)/e^{aδ} = -expm1(-aδ).
pub fn delta_step(delta: Fortnights, a: PerFortnight) -> Fortnights {
    let (d, a) = (delta.0, a.0);
    debug_assert!(d > 0.0 && a > 0.0);
    Fortnights((-(-a * d).exp_m1() / d).ln_1p() / a)
}

/// Iterates `delta_step` to its fixed point δ* = W(a)/a.
///
/// The recursion contracts with factor at most 1/2, so once successive
/// iterates differ by no more than `tol` the error is already below it;
/// a few polish steps push the final iterate well inside.
pub fn solve_fixed_point(a: PerFortnight, delta0: Fortnights, tol: f64) -> Result<Fortnights> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance {tol} must be > 0")));
    }
    if !(a.0.is_finite() && a.0 > 0.0) {
        return Err(Error::Parameter(format!("growth rate {} must be > 0", a.0)));
    }
    if !(delta0.0.is_finite() && delta0.0 > 0.0) {
        return Err(Error::Parameter(format!("start {} must be > 0", delta0.0)));
    }
    let mut delta = delta0;
    for _ in 0..100_000 {
        let next = delta_step(delta, a);
        let step = (next.0 - delta.0).abs();
        delta = next;
        if step <= tol {
            for _ in 0..3 {
                delta = delta_step(delta, a);
            }
            return Ok(delta);
        }
    }
    Err(Error::Numeric(format!(
        "fixed point iteration stalled for a={}",
        a.0
    )))
}

fn steady_root(a_scaled: f64, design_time: f64) -> f64 {
    // root of a_scaled*T + ln T - ln(design_time) = 0 on (0, design_time]
    if a_scaled == 0.0 {
        return design_time;
    }
    let g = |t: f64| a_scaled * t + t.ln() - design_time.ln();
    let mut t = bisect(&g, design_time * 1e-12, design_time, 1e-11)
        .expect("steady-state bracket always has a sign change");
    for _ in 0..3 {
        t -= g(t) / (a_scaled + 1.0 / t);
    }
    t
}

/// Steady-state segment duration in seconds: the unique positive root
/// of e^{a T} = 1,209,600 / T for hash growth a per second.
pub fn steady_segment_time(a: PerSecond) -> Result<f64> {
    if !(a.0.is_finite() && a.0 >= 0.0) {
        return Err(Error::Parameter(format!("growth rate {} must be >= 0", a.0)));
    }
    Ok(steady_root(a.0, SECONDS_PER_FORTNIGHT))
}

/// Steady-state mean block time in seconds: the unique positive root
/// of e^{2016 a T} = 600 / T.
pub fn steady_block_time(a: PerSecond) -> Result<f64> {
    if !(a.0.is_finite() && a.0 >= 0.0) {
        return Err(Error::Parameter(format!("growth rate {} must be >= 0", a.0)));
    }
    Ok(steady_root(a.0 * BLOCKS_PER_SEGMENT as f64, TARGET_BLOCK_TIME_S))
}

/// The steady state the retarget feedback settles into under
/// exponential hash growth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub a: PerFortnight,
    pub delta_star: Fortnights,
    pub block_time_s: f64,
    pub segment_time_s: f64,
}

impl SteadyState {
    pub fn for_rate(a: PerSecond) -> Result<SteadyState> {
        let af = a.per_fortnight();
        let delta_star = if af.0 == 0.0 {
            Fortnights(1.0)
        } else {
            Fortnights(lambert_w(af.0)? / af.0)
        };
        Ok(SteadyState {
            a: af,
            delta_star,
            block_time_s: steady_block_time(a)?,
            segment_time_s: steady_segment_time(a)?,
        })
    }
}

/// Difficulty-change schedule under the deterministic approximation:
/// arrivals are replaced by their expected count, so the n-th change
/// time y_n solves "2016 expected arrivals since y_{n-1}".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicSchedule {
    /// Change times in seconds, y_0 first; length n_segments + 1.
    pub y_s: Vec<f64>,
    /// Segment durations y_n - y_{n-1}, seconds.
    pub delta_s: Vec<f64>,
    /// Difficulty in force on (y_{n-1}, y_n].
    pub difficulty: Vec<f64>,
}

impl DeterministicSchedule {
    pub fn delta_fortnights(&self) -> Vec<Fortnights> {
        self.delta_s
            .iter()
            .map(|&d| Fortnights(d / SECONDS_PER_FORTNIGHT))
            .collect()
    }

    pub fn segments(&self) -> usize {
        self.difficulty.len()
    }
}

/// Expected arrivals per segment under the (possibly delay-adjusted)
/// rate. The mean-field adjustment folds the per-arrival ramp loss into
/// the rate itself: λ~ = λ/(1 + λ/c).
const SEGMENT_TARGET: f64 = BLOCKS_PER_SEGMENT as f64;

/// Solves the deterministic schedule forward from (d1, y0).
///
/// For an exponential hash model every step has a closed form, delay
/// included; empirical models are integrated piecewise (splitting at
/// sample knots) and inverted by bracketed bisection with a Newton
/// polish. Difficulty advances by the exact retarget arithmetic, so
/// d_{n+1}/d_n = 1,209,600/δ_n holds to the last bit.
pub fn deterministic_schedule(
    hash: &HashRateModel,
    d1: f64,
    y0: f64,
    n_segments: usize,
    delay: &DelayModel,
) -> Result<DeterministicSchedule> {
    if !(d1.is_finite() && d1 > 0.0) {
        return Err(Error::Parameter(format!("initial difficulty {d1} must be > 0")));
    }
    if n_segments == 0 {
        return Err(Error::Parameter("schedule needs >= 1 segment".into()));
    }
    delay.validate()?;
    let (dom_lo, dom_hi) = hash.domain();
    if !(y0 >= dom_lo && y0 < dom_hi) {
        return Err(Error::Domain(format!(
            "start time {y0} outside hash model domain [{dom_lo}, {dom_hi}]"
        )));
    }

    let mut y = vec![y0];
    let mut deltas = Vec::new();
    let mut diffs = Vec::new();
    let mut d = d1;
    for n in 0..n_segments {
        let y_prev = *y.last().unwrap();
        let step = match hash {
            HashRateModel::Exponential { a, b } => {
                exponential_step(*a, *b, d, y_prev, delay).map_err(|e| partial(n, e))?
            }
            HashRateModel::Empirical { series } => {
                let lambda = |t: f64| {
                    let h = series.value_at(t).unwrap_or(0.0);
                    delay.mean_field_rate(h / (HASHES_PER_DIFFICULTY * d))
                };
                empirical_step(series.times(), &lambda, y_prev, series.end())
                    .map_err(|e| partial(n, e))?
            }
        };
        if !(step.is_finite() && step > 0.0) {
            return Err(partial(
                n,
                Error::Numeric(format!("segment {n} produced step {step}")),
            ));
        }
        let y_next = y_prev + step;
        y.push(y_next);
        deltas.push(step);
        diffs.push(d);
        d = next_difficulty(d, step)?;
    }
    Ok(DeterministicSchedule {
        y_s: y,
        delta_s: deltas,
        difficulty: diffs,
    })
}

fn partial(completed: usize, cause: Error) -> Error {
    match cause {
        e @ Error::Partial { .. } => e,
        e => Error::Partial {
            completed,
            msg: e.to_string(),
        },
    }
}

/// Closed-form segment step for λ(t) = e^{a t + β}, β = b - ln(2^32 d).
///
/// Without delay: Λ(y, y+Δ) = (λ(y)/a)(e^{aΔ}-1) = 2016.
/// With ramp rate c: integrating λ/(1+λ/c) gives
/// (c/a) ln((c+λ(y+Δ))/(c+λ(y))) = 2016, which rearranges to the ln_1p
/// form below; dead time d maps to the same formula with c = 1/d.
fn exponential_step(a: f64, b: f64, d: f64, y: f64, delay: &DelayModel) -> Result<f64> {
    let beta = b - (HASHES_PER_DIFFICULTY * d).ln();
    let lam = (a * y + beta).exp();
    if !(lam.is_finite() && lam > 0.0) {
        return Err(Error::Numeric(format!("rate {lam} at t={y} not usable")));
    }
    let inv_c = match *delay {
        DelayModel::None => 0.0,
        DelayModel::ExpRamp { c } => 1.0 / c,
        DelayModel::Constant { dead_time } => dead_time,
    };
    if a == 0.0 {
        // constant rate; the mean-field rate is constant too
        let eff = lam / (1.0 + lam * inv_c);
        return Ok(SEGMENT_TARGET / eff);
    }
    if inv_c == 0.0 {
        let arg = a * SEGMENT_TARGET / lam;
        if arg <= -1.0 {
            return Err(Error::Exhausted(format!(
                "remaining intensity {} below segment target",
                lam / -a
            )));
        }
        return Ok(arg.ln_1p() / a);
    }
    // eps = 2016 a / c; λ(y+Δ)/λ(y) = 1 + expm1(eps)(1 + c/λ)
    let eps = SEGMENT_TARGET * a * inv_c;
    let grow = eps.exp_m1() * (1.0 + 1.0 / (lam * inv_c));
    if grow <= -1.0 {
        return Err(Error::Exhausted(
            "remaining delay-adjusted intensity below segment target".into(),
        ));
    }
    Ok(grow.ln_1p() / a)
}

/// Numeric segment step: cumulative rate integral (split at knots)
/// equals 2016, inverted by doubling bracket + bisection + Newton.
fn empirical_step<F: Fn(f64) -> f64>(
    knots: &[f64],
    lambda: &F,
    y: f64,
    domain_end: f64,
) -> Result<f64> {
    let cumulative = |hi: f64| -> f64 {
        let mut total = 0.0;
        let mut lo = y;
        for &k in knots.iter().filter(|&&k| k > y && k < hi) {
            total += integrate(lambda, lo, k, 1e-10);
            lo = k;
        }
        total + integrate(lambda, lo, hi, 1e-10)
    };

    let whole = cumulative(domain_end);
    if whole < SEGMENT_TARGET {
        return Err(Error::Exhausted(format!(
            "only {whole:.3} expected arrivals remain before the hash data ends"
        )));
    }
    // expand an upper bound, then bisect the residual
    let mut hi = y + (domain_end - y).min(1.0).max(1e-3);
    while cumulative(hi) < SEGMENT_TARGET {
        hi = domain_end.min(y + 2.0 * (hi - y));
        if hi >= domain_end {
            hi = domain_end;
            break;
        }
    }
    let g = |t: f64| cumulative(t) - SEGMENT_TARGET;
    let mut root = bisect(&g, y, hi, 1e-12)?;
    for _ in 0..2 {
        let l = lambda(root);
        if l > 0.0 {
            root -= g(root) / l;
        }
    }
    Ok(root - y)
}
