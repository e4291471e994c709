//! Time-varying arrival intensities λ(t), their integrals and inverses.
//!
//! The block process has rate λ(t) = H(t)/(2^32 D(t)). Closed-form
//! kinds (constant, linear, exponential) integrate and invert exactly;
//! the empirical kind integrates a piecewise-linear hash series over a
//! step-function difficulty by adaptive quadrature split at the knots.
//! The delayed kind multiplies a base rate by the propagation factor
//! anchored at the last event; it exists so a single inter-arrival
//! episode can be integrated, sampled by thinning, and used to show
//! the delayed process is no longer Poisson.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::delay::{ramp_exposure, DelayModel};
use crate::error::{Error, Result};
use crate::hashrate::HashRateSeries;
use crate::numeric::{bisect, integrate};
use crate::units::HASHES_PER_DIFFICULTY;

/// Difficulty as a right-continuous step function of time: `initial`
/// applies before the first change, each change (t, d) applies from t on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultySteps {
    initial: f64,
    changes: Vec<(f64, f64)>,
}

impl DifficultySteps {
    pub fn new(initial: f64, changes: Vec<(f64, f64)>) -> Result<Self> {
        if !(initial.is_finite() && initial > 0.0) {
            return Err(Error::Parameter(format!(
                "initial difficulty {initial} must be positive"
            )));
        }
        for pair in changes.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::Structure(format!(
                    "difficulty changes out of order at t={}",
                    pair[1].0
                )));
            }
        }
        for &(t, d) in &changes {
            if !(t.is_finite() && d.is_finite() && d > 0.0) {
                return Err(Error::Parameter(format!(
                    "difficulty change ({t}, {d}) not usable"
                )));
            }
        }
        Ok(DifficultySteps { initial, changes })
    }

    pub fn constant(d: f64) -> Result<Self> {
        DifficultySteps::new(d, Vec::new())
    }

    /// Difficulty in force at t (right-continuous).
    pub fn value_at(&self, t: f64) -> f64 {
        match self.changes.partition_point(|&(ct, _)| ct <= t) {
            0 => self.initial,
            k => self.changes[k - 1].1,
        }
    }

    /// Difficulty in force just before t.
    pub fn value_before(&self, t: f64) -> f64 {
        match self.changes.partition_point(|&(ct, _)| ct < t) {
            0 => self.initial,
            k => self.changes[k - 1].1,
        }
    }

    pub fn change_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.changes.iter().map(|&(t, _)| t)
    }
}

/// Arrival intensity λ(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateFunction {
    Constant { lambda: f64 },
    /// λ(t) = a t on t ≥ 0.
    Linear { a: f64 },
    /// λ(t) = e^{a t + b}.
    Exponential { a: f64, b: f64 },
    /// λ(t) = H(t) / (2^32 D(t)) on the series' time range.
    Empirical {
        series: HashRateSeries,
        difficulty: DifficultySteps,
    },
    /// Base rate scaled by the propagation factor since `last_event`.
    Delayed {
        base: Box<RateFunction>,
        delay: DelayModel,
        last_event: f64,
    },
}

impl RateFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            RateFunction::Constant { lambda } => {
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return Err(Error::Parameter(format!("rate {lambda} must be >= 0")));
                }
            }
            RateFunction::Linear { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::Parameter(format!("slope {a} must be > 0")));
                }
            }
            RateFunction::Exponential { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::Parameter(format!("({a}, {b}) must be finite")));
                }
            }
            RateFunction::Empirical { .. } => {}
            RateFunction::Delayed { base, delay, last_event } => {
                if matches!(**base, RateFunction::Delayed { .. }) {
                    return Err(Error::Parameter("delayed rate cannot nest".into()));
                }
                base.validate()?;
                delay.validate()?;
                if !last_event.is_finite() {
                    return Err(Error::Parameter(format!(
                        "last event time {last_event} must be finite"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Time range on which the rate is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            RateFunction::Constant { .. } | RateFunction::Exponential { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            RateFunction::Linear { .. } => (0.0, f64::INFINITY),
            RateFunction::Empirical { series, .. } => (series.start(), series.end()),
            RateFunction::Delayed { base, .. } => base.domain(),
        }
    }

    /// Where arrival counting starts for nth-arrival laws.
    pub fn origin(&self) -> f64 {
        match self {
            RateFunction::Constant { .. }
            | RateFunction::Linear { .. }
            | RateFunction::Exponential { .. } => 0.0,
            RateFunction::Empirical { series, .. } => series.start(),
            RateFunction::Delayed { last_event, .. } => *last_event,
        }
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        match self {
            RateFunction::Constant { lambda } => Ok(*lambda),
            RateFunction::Linear { a } => {
                if t < 0.0 {
                    return Err(Error::Domain(format!("linear rate undefined at t={t}")));
                }
                Ok(a * t)
            }
            RateFunction::Exponential { a, b } => Ok((a * t + b).exp()),
            RateFunction::Empirical { series, difficulty } => {
                let h = series.value_at(t)?;
                Ok(h / (HASHES_PER_DIFFICULTY * difficulty.value_at(t)))
            }
            RateFunction::Delayed { base, delay, last_event } => {
                Ok(base.value_at(t)? * delay.factor(t - last_event))
            }
        }
    }

    /// Interior time points where the rate is not smooth; integration
    /// and envelope construction split there.
    pub fn knots(&self) -> Vec<f64> {
        match self {
            RateFunction::Empirical { series, difficulty } => {
                let mut k: Vec<f64> = series.times().to_vec();
                k.extend(difficulty.change_times());
                k.sort_by(|x, y| x.partial_cmp(y).unwrap());
                k.dedup();
                k
            }
            RateFunction::Delayed { base, delay, last_event } => {
                let mut k = base.knots();
                if let DelayModel::Constant { dead_time } = delay {
                    k.push(last_event + dead_time);
                    k.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    k.dedup();
                }
                k
            }
            _ => Vec::new(),
        }
    }

    /// Λ(t0, t1) = ∫ λ. Closed form where one exists, quadrature
    /// (relative tolerance 1e-10, split at knots) otherwise.
    pub fn cumulative_intensity(&self, t0: f64, t1: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(t0 >= lo && t1 <= hi) {
            return Err(Error::Domain(format!(
                "[{t0}, {t1}] outside rate domain [{lo}, {hi}]"
            )));
        }
        if !(t1 >= t0) {
            return Err(Error::Parameter(format!("interval [{t0}, {t1}] reversed")));
        }
        match self {
            RateFunction::Constant { lambda } => Ok(lambda * (t1 - t0)),
            RateFunction::Linear { a } => Ok(0.5 * a * (t1 * t1 - t0 * t0)),
            RateFunction::Exponential { a, b } => Ok(exp_mass(*a, *b, t0, t1)),
            RateFunction::Empirical { .. } => Ok(self.quadrature_mass(t0, t1)),
            RateFunction::Delayed { base, delay, last_event } => {
                let s = *last_event;
                match (delay, base.as_ref()) {
                    (DelayModel::None, _) => base.cumulative_intensity(t0, t1),
                    (DelayModel::Constant { dead_time }, _) => {
                        let start = t0.max(s + dead_time);
                        if t1 <= start {
                            Ok(0.0)
                        } else {
                            base.cumulative_intensity(start, t1)
                        }
                    }
                    (DelayModel::ExpRamp { c }, RateFunction::Constant { lambda }) => {
                        Ok(lambda * (ramp_exposure(0.0, *c, t1 - s) - ramp_exposure(0.0, *c, t0 - s)))
                    }
                    (DelayModel::ExpRamp { c }, RateFunction::Exponential { a, b }) => {
                        Ok((a * s + b).exp()
                            * (ramp_exposure(*a, *c, t1 - s) - ramp_exposure(*a, *c, t0 - s)))
                    }
                    (DelayModel::ExpRamp { .. }, _) => Ok(self.quadrature_mass(t0, t1)),
                }
            }
        }
    }

    fn quadrature_mass(&self, t0: f64, t1: f64) -> f64 {
        let f = |t: f64| self.value_at(t).unwrap_or(0.0);
        let mut total = 0.0;
        let mut lo = t0;
        for k in self.knots().into_iter().filter(|&k| k > t0 && k < t1) {
            total += integrate(&f, lo, k, 1e-10);
            lo = k;
        }
        total + integrate(&f, lo, t1, 1e-10)
    }

    /// Smallest z with Λ(t0, z) = n, within 1e-9 n.
    pub fn invert_intensity(&self, t0: f64, n: f64) -> Result<f64> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Parameter(format!("target mass {n} must be > 0")));
        }
        let (lo, hi) = self.domain();
        if !(t0 >= lo && t0 < hi) {
            return Err(Error::Domain(format!("start {t0} outside [{lo}, {hi}]")));
        }
        match self {
            RateFunction::Constant { lambda } => {
                if *lambda <= 0.0 {
                    return Err(Error::Exhausted("zero rate never accumulates mass".into()));
                }
                Ok(t0 + n / lambda)
            }
            RateFunction::Linear { a } => Ok((t0 * t0 + 2.0 * n / a).sqrt()),
            RateFunction::Exponential { a, b } => {
                let lam0 = (a * t0 + b).exp();
                if lam0 <= 0.0 {
                    return Err(Error::Exhausted(format!("rate underflows at t={t0}")));
                }
                if *a == 0.0 {
                    return Ok(t0 + n / lam0);
                }
                let arg = a * n / lam0;
                if arg <= -1.0 {
                    return Err(Error::Exhausted(format!(
                        "total remaining mass {} < {n}",
                        lam0 / -a
                    )));
                }
                Ok(t0 + arg.ln_1p() / a)
            }
            _ => self.invert_by_bracketing(t0, n, hi),
        }
    }

    fn invert_by_bracketing(&self, t0: f64, n: f64, domain_hi: f64) -> Result<f64> {
        // expand until the bracket holds the target mass
        let mut step = 1.0;
        let mut hi = t0;
        loop {
            let next = if domain_hi.is_finite() {
                domain_hi.min(hi + step)
            } else {
                hi + step
            };
            hi = next;
            let mass = self.cumulative_intensity(t0, hi)?;
            if mass >= n {
                break;
            }
            if hi >= domain_hi {
                return Err(Error::Exhausted(format!(
                    "only {mass:.6} of {n} mass available before domain end"
                )));
            }
            step *= 2.0;
        }
        let g = |z: f64| self.cumulative_intensity(t0, z).unwrap_or(f64::NAN) - n;
        let mut z = if g(t0) >= 0.0 {
            t0
        } else {
            bisect(&g, t0, hi, 1e-13)?
        };
        for _ in 0..2 {
            if let Ok(lam) = self.value_at(z) {
                if lam > 0.0 {
                    z = (z - g(z) / lam).clamp(t0, domain_hi);
                }
            }
        }
        Ok(z)
    }

    /// Density of the n-th arrival counted from the rate's origin:
    /// λ(t) Λ^{n-1} e^{-Λ} / (n-1)!.
    pub fn nth_arrival_density(&self, n: u64, t: f64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Parameter("arrival index starts at 1".into()));
        }
        let origin = self.origin();
        if t < origin {
            return Err(Error::Domain(format!(
                "t={t} precedes the counting origin {origin}"
            )));
        }
        let lam = self.value_at(t)?;
        let mass = self.cumulative_intensity(origin, t)?;
        if n == 1 {
            return Ok(lam * (-mass).exp());
        }
        if lam == 0.0 || mass == 0.0 {
            return Ok(0.0);
        }
        let k = n as f64;
        let ln_f = lam.ln() + (k - 1.0) * mass.ln() - mass - ln_gamma(k);
        Ok(ln_f.exp())
    }

    /// Largest rate value on [lo, hi]; exact for every kind (the
    /// empirical rate is piecewise linear over constant difficulty, so
    /// the maximum sits at an interval end or a knot).
    pub fn max_rate_on(&self, lo: f64, hi: f64) -> Result<f64> {
        let (dlo, dhi) = self.domain();
        if !(lo >= dlo && hi <= dhi && hi >= lo) {
            return Err(Error::Domain(format!("[{lo}, {hi}] outside [{dlo}, {dhi}]")));
        }
        match self {
            RateFunction::Constant { lambda } => Ok(*lambda),
            RateFunction::Linear { a } => Ok(a * hi),
            RateFunction::Exponential { a, .. } => {
                self.value_at(if *a >= 0.0 { hi } else { lo })
            }
            RateFunction::Empirical { series, difficulty } => {
                let mut best: f64 = self.value_at(lo)?.max(self.value_at(hi)?);
                for k in self.knots().into_iter().filter(|&k| k > lo && k < hi) {
                    let h = series.value_at(k)?;
                    let after = h / (HASHES_PER_DIFFICULTY * difficulty.value_at(k));
                    let before = h / (HASHES_PER_DIFFICULTY * difficulty.value_before(k));
                    best = best.max(after).max(before);
                }
                Ok(best)
            }
            RateFunction::Delayed { base, .. } => base.max_rate_on(lo, hi),
        }
    }
}

/// ∫ e^{a t + b} over [t0, t1], written to survive tiny a.
fn exp_mass(a: f64, b: f64, t0: f64, t1: f64) -> f64 {
    if a == 0.0 {
        return b.exp() * (t1 - t0);
    }
    (a * t0 + b).exp() * (a * (t1 - t0)).exp_m1() / a
}
