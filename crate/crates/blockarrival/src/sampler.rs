//! Arrival-time sampling for the nonhomogeneous Poisson process.
//!
//! Closed-form rates are sampled exactly: unit-exponential increments
//! pushed through the inverse cumulative intensity. Empirical rates
//! are thinned against a piecewise-constant majorant refreshed at the
//! series knots. Delayed rates thin candidate arrivals of the base
//! process by the propagation factor, restarting the ramp clock at
//! every accepted arrival, which is exactly what makes the resulting
//! process non-Poisson.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::delay::DelayModel;
use crate::error::{Error, Result};
use crate::rate::RateFunction;

/// When to stop collecting arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum SampleStop {
    /// Exactly this many arrivals.
    Count { n: u64 },
    /// Every arrival at or before this time.
    Horizon { t: f64 },
}

/// A sampled arrival sequence with everything needed to redraw it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSample {
    pub times: Vec<f64>,
    pub rate: RateFunction,
    pub seed: u64,
}

/// Draws one arrival at a time; shared by the public sampler and the
/// block simulator (which changes the rate between segments).
pub(crate) struct ArrivalStepper<'a> {
    rate: &'a RateFunction,
    knots: Vec<f64>,
    dom_hi: f64,
}

impl<'a> ArrivalStepper<'a> {
    pub(crate) fn new(rate: &'a RateFunction) -> Result<Self> {
        rate.validate()?;
        let knots = match rate {
            RateFunction::Empirical { .. } => rate.knots(),
            RateFunction::Delayed { base, .. } => base.knots(),
            _ => Vec::new(),
        };
        Ok(ArrivalStepper {
            rate,
            knots,
            dom_hi: rate.domain().1,
        })
    }

    /// Next arrival strictly after `prev`, with the delay clock
    /// anchored at `anchor` (the last accepted event). Ok(None) means
    /// the rate's mass or domain ran out first.
    pub(crate) fn next(
        &self,
        prev: f64,
        anchor: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<f64>> {
        match self.rate {
            RateFunction::Constant { .. }
            | RateFunction::Linear { .. }
            | RateFunction::Exponential { .. } => invert_step(self.rate, prev, rng),
            RateFunction::Empirical { .. } => self.thin_step(self.rate, prev, |_| 1.0, rng),
            RateFunction::Delayed { base, delay, .. } => match delay {
                DelayModel::None => self.base_step(base, prev, rng),
                DelayModel::Constant { dead_time } => {
                    let start = prev.max(anchor + dead_time);
                    if start >= self.dom_hi {
                        return Ok(None);
                    }
                    self.base_step(base, start, rng)
                }
                DelayModel::ExpRamp { .. } => {
                    if matches!(**base, RateFunction::Empirical { .. }) {
                        self.thin_step(base, prev, |t| delay.factor(t - anchor), rng)
                    } else {
                        // exact base candidates, kept with the ramp probability
                        let mut t = prev;
                        loop {
                            t = match invert_step(base, t, rng)? {
                                Some(x) => x,
                                None => return Ok(None),
                            };
                            if rng.gen::<f64>() <= delay.factor(t - anchor) {
                                return Ok(Some(t));
                            }
                        }
                    }
                }
            },
        }
    }

    fn base_step(
        &self,
        base: &RateFunction,
        from: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<f64>> {
        if matches!(base, RateFunction::Empirical { .. }) {
            self.thin_step(base, from, |_| 1.0, rng)
        } else {
            invert_step(base, from, rng)
        }
    }

    /// Thinning walk between knots: within one knot interval the exact
    /// maximum of the envelope rate dominates, so a homogeneous
    /// candidate stream at that level can be filtered by λ_eff/M.
    fn thin_step<F: Fn(f64) -> f64>(
        &self,
        env: &RateFunction,
        from: f64,
        factor: F,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<f64>> {
        let mut t = from;
        loop {
            if t >= self.dom_hi {
                return Ok(None);
            }
            let idx = self.knots.partition_point(|&k| k <= t);
            let w = if idx < self.knots.len() {
                self.knots[idx].min(self.dom_hi)
            } else {
                self.dom_hi
            };
            let m = env.max_rate_on(t, w)?;
            if m <= 0.0 {
                t = w;
                continue;
            }
            let e: f64 = rng.sample(Exp1);
            let dt = e / m;
            if !(t + dt < w) {
                t = w;
                continue;
            }
            t += dt;
            let lam = env.value_at(t)? * factor(t);
            if rng.gen::<f64>() * m <= lam {
                return Ok(Some(t));
            }
        }
    }
}

fn invert_step(rate: &RateFunction, from: f64, rng: &mut ChaCha8Rng) -> Result<Option<f64>> {
    let e: f64 = rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE);
    match rate.invert_intensity(from, e) {
        Ok(t) => Ok(Some(t)),
        Err(Error::Exhausted(_)) => Ok(None),
        Err(other) => Err(other),
    }
}

/// Samples the point process with intensity `rate` from `t0`, stopping
/// by count or horizon. Bit-reproducible for a given (rate, stop, seed).
pub fn sample_nhpp(
    rate: &RateFunction,
    t0: f64,
    stop: SampleStop,
    seed: u64,
) -> Result<ArrivalSample> {
    let stepper = ArrivalStepper::new(rate)?;
    let (dom_lo, dom_hi) = rate.domain();
    if !(t0 >= dom_lo && t0 < dom_hi) {
        return Err(Error::Domain(format!(
            "start {t0} outside rate domain [{dom_lo}, {dom_hi})"
        )));
    }
    match stop {
        SampleStop::Count { n: 0 } => {
            return Err(Error::Parameter("arrival count must be >= 1".into()))
        }
        SampleStop::Horizon { t } if !(t >= t0) => {
            return Err(Error::Parameter(format!("horizon {t} precedes start {t0}")));
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times: Vec<f64> = Vec::new();
    let mut prev = t0;
    let mut anchor = match rate {
        RateFunction::Delayed { last_event, .. } => *last_event,
        _ => t0,
    };
    loop {
        match stepper.next(prev, anchor, &mut rng)? {
            None => match stop {
                // no arrival can fall inside [prev, horizon] any more
                SampleStop::Horizon { .. } => break,
                SampleStop::Count { .. } => {
                    return Err(Error::Partial {
                        completed: times.len(),
                        msg: "rate mass exhausted before the requested count".into(),
                    })
                }
            },
            Some(t) => {
                if let SampleStop::Horizon { t: h } = stop {
                    if t > h {
                        break;
                    }
                }
                times.push(t);
                prev = t;
                anchor = t;
                if let SampleStop::Count { n } = stop {
                    if times.len() as u64 == n {
                        break;
                    }
                }
            }
        }
    }
    Ok(ArrivalSample {
        times,
        rate: rate.clone(),
        seed,
    })
}
