//! Propagation delay models.
//!
//! A freshly mined block takes time to reach the rest of the network;
//! until it does, competing miners still grind on the old tip. Two
//! idealizations: a hard dead time (nobody useful for d seconds), and
//! an exponential ramp where the fraction of the network mining on the
//! new tip at elapsed time u is 1 - e^{-c u}. The ramp factor is kept
//! in the convention that makes it a probability: it rises from 0 to 1
//! with rate c > 0, and the median catch-up delay is ln 2 / c.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DelayModel {
    None,
    /// No effective hashing for `dead_time` seconds after each arrival.
    Constant { dead_time: f64 },
    /// Effective rate ramps up as 1 - e^{-c u} after each arrival.
    ExpRamp { c: f64 },
}

impl DelayModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DelayModel::None => Ok(()),
            DelayModel::Constant { dead_time } => {
                if dead_time.is_finite() && dead_time >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!("dead_time {dead_time} must be >= 0")))
                }
            }
            DelayModel::ExpRamp { c } => {
                if c.is_finite() && c > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!("ramp rate {c} must be > 0")))
                }
            }
        }
    }

    /// Ramp with a given median catch-up delay in seconds.
    pub fn exp_ramp_with_median(median_s: f64) -> Result<Self> {
        if !(median_s.is_finite() && median_s > 0.0) {
            return Err(Error::Parameter(format!("median delay {median_s} must be > 0")));
        }
        Ok(DelayModel::ExpRamp {
            c: std::f64::consts::LN_2 / median_s,
        })
    }

    /// Fraction of the hash rate effective `elapsed` seconds after an arrival.
    pub fn factor(&self, elapsed: f64) -> f64 {
        if elapsed <= 0.0 {
            return match self {
                DelayModel::None => 1.0,
                _ => 0.0,
            };
        }
        match *self {
            DelayModel::None => 1.0,
            DelayModel::Constant { dead_time } => {
                if elapsed < dead_time {
                    0.0
                } else {
                    1.0
                }
            }
            DelayModel::ExpRamp { c } => -(-c * elapsed).exp_m1(),
        }
    }

    pub fn median_delay(&self) -> f64 {
        match *self {
            DelayModel::None => 0.0,
            DelayModel::Constant { dead_time } => dead_time,
            DelayModel::ExpRamp { c } => std::f64::consts::LN_2 / c,
        }
    }

    /// Mean-field adjusted rate for the deterministic approximation:
    /// each arrival cycle loses on average one ramp time constant
    /// (1/c), so the long-run rate is the harmonic combination
    /// lambda / (1 + lambda/c). The dead-time analogue adds the dead
    /// time to the mean cycle instead.
    pub fn mean_field_rate(&self, lambda: f64) -> f64 {
        match *self {
            DelayModel::None => lambda,
            DelayModel::Constant { dead_time } => lambda / (1.0 + lambda * dead_time),
            DelayModel::ExpRamp { c } => lambda / (1.0 + lambda / c),
        }
    }
}

/// Base rate modulated by the delay ramp, `elapsed` seconds after the
/// last arrival.
pub fn effective_rate(lambda: f64, delay: &DelayModel, elapsed: f64) -> f64 {
    lambda * delay.factor(elapsed)
}

/// Integral of e^{a u} (1 - e^{-c u}) du over (0, delta): the expected
/// work done across one inter-arrival gap per unit of starting hash
/// rate, when the rate grows like e^{a u} but is masked by the ramp.
/// Closed form (e^{a d}-1)/a - (e^{(a-c) d}-1)/(a-c), with the a -> 0
/// and a -> c limits handled explicitly.
pub fn ramp_exposure(a: f64, c: f64, delta: f64) -> f64 {
    debug_assert!(c > 0.0 && delta >= 0.0);
    let grow = |r: f64| {
        // (e^{r d} - 1)/r, continuous at r = 0
        if r == 0.0 {
            delta
        } else {
            (r * delta).exp_m1() / r
        }
    };
    grow(a) - grow(a - c)
}
