//! Exponential integrals and closed-form nth-arrival means.
//!
//! For the exponentially growing rate λ(t) = e^{at} the mean of the
//! n-th arrival has a finite closed form built from e^{1/a} Ei(-1/a)
//! and two layers of factorial sums. The outer sum alternates in sign
//! with powers of 1/a, so for small a and large n it cancels
//! catastrophically; evaluation tracks the worst intermediate
//! magnitude and, when the implied relative error exceeds 1e-6, falls
//! back to integrating the survival function and says so.

use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::numeric::{integrate, KahanSum};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// e^x E1(x) for x > 0; avoids the gross under/overflow of the factors.
/// Series below 1, modified Lentz continued fraction above.
pub fn e1_scaled(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 1.0 {
        let mut sum = 0.0;
        let mut u = 1.0; // x^k / k!
        for k in 1..200 {
            u *= x / k as f64;
            let term = if k % 2 == 1 { u } else { -u } / k as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        return x.exp() * (-EULER_GAMMA - x.ln() + sum);
    }
    // e^x E1(x) = 1/(x+1 - 1/(x+3 - 4/(x+5 - 9/(x+7 - ...))))
    let tiny = 1e-300;
    let mut f = x + 1.0;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..500 {
        let aj = -((j * j) as f64);
        let bj = x + (2 * j + 1) as f64;
        d = bj + aj * d;
        if d == 0.0 {
            d = tiny;
        }
        c = bj + aj / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Principal-value exponential integral Ei(x), x != 0.
pub fn exponential_integral_ei(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Parameter(format!("Ei argument {x} must be finite")));
    }
    if x == 0.0 {
        return Err(Error::Domain("Ei has a logarithmic singularity at 0".into()));
    }
    if x < 0.0 {
        let y = -x;
        return Ok(-((-y).exp() * e1_scaled(y)));
    }
    if x <= 40.0 {
        // Ei(x) = γ + ln x + Σ_{k≥1} x^k/(k·k!)
        let mut sum = 0.0;
        let mut u = 1.0; // x^k / k!
        let mut k = 1usize;
        loop {
            u *= x / k as f64;
            let term = u / k as f64;
            sum += term;
            if term < 1e-17 * sum && (k as f64) > x {
                break;
            }
            k += 1;
            if k > 400 {
                break;
            }
        }
        return Ok(EULER_GAMMA + x.ln() + sum);
    }
    // asymptotic e^x/x Σ k!/x^k, truncated at its smallest term
    let mut sum = 1.0;
    let mut t = 1.0;
    let mut k = 1.0;
    while k < x {
        let next = t * k / x;
        if next >= t {
            break;
        }
        t = next;
        sum += t;
        if t < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    Ok((x - x.ln()).exp() * sum)
}

/// Mean of the n-th arrival, with a note on how it was computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NthArrivalMean {
    pub value: f64,
    /// True when the closed form was abandoned for the survival integral.
    pub by_quadrature: bool,
}

/// E[X_n] for rate λ(t) = e^{at}, a > 0, counting from t=0.
///
/// Closed form: Σ_{i=0}^{n-1} (-a)^{-i-1} (e^{1/a} Ei(-1/a)/i! - S_i)
/// with S_i = Σ_{j=1}^{i} (-a)^j/(j (i-j)!) P_j, P_j = Σ_{k<j} a^{-k}/k!.
pub fn expected_nth_arrival_exponential(a: f64, n: u64) -> Result<NthArrivalMean> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Parameter(format!("growth rate {a} must be > 0")));
    }
    if n == 0 || n > 2016 {
        return Err(Error::Parameter(format!("arrival index {n} outside 1..=2016")));
    }
    if let Some(value) = nth_mean_closed_form(a, n as usize) {
        return Ok(NthArrivalMean { value, by_quadrature: false });
    }
    Ok(NthArrivalMean {
        value: nth_mean_survival_integral(a, n as f64),
        by_quadrature: true,
    })
}

fn nth_mean_closed_form(a: f64, n: usize) -> Option<f64> {
    let inv_a = 1.0 / a;
    let e_term = -e1_scaled(inv_a); // e^{1/a} Ei(-1/a)

    // inv_fact[m] = 1/m!; p[j] = Σ_{k<j} a^{-k}/k!; neg_a_pow[j] = (-a)^j
    let mut inv_fact = vec![0.0; n];
    inv_fact[0] = 1.0;
    for m in 1..n {
        inv_fact[m] = inv_fact[m - 1] / m as f64;
    }
    let mut neg_a_pow = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut acc = KahanSum::default();
    let mut pw = 1.0; // a^{-(j-1)}/(j-1)! at the head of iteration j
    for j in 1..n {
        acc.add(pw);
        p[j] = acc.value();
        pw *= inv_a / j as f64;
        neg_a_pow[j] = if j == 1 { -a } else { neg_a_pow[j - 1] * -a };
    }

    let mut total = KahanSum::default();
    let mut worst: f64 = 0.0;
    let mut pow_outer = -inv_a; // (-a)^{-i-1} at i = 0
    for i in 0..n {
        let mut s_i = KahanSum::default();
        let mut worst_inner: f64 = 0.0;
        for j in 1..=i {
            let t = neg_a_pow[j] / j as f64 * inv_fact[i - j] * p[j];
            s_i.add(t);
            worst_inner = worst_inner.max(t.abs());
        }
        let bracket = e_term * inv_fact[i] - s_i.value();
        let term = pow_outer * bracket;
        if !term.is_finite() {
            return None;
        }
        total.add(term);
        worst = worst
            .max(term.abs())
            .max(worst_inner * pow_outer.abs())
            .max((e_term * inv_fact[i] * pow_outer).abs());
        pow_outer *= -inv_a;
        if !pow_outer.is_finite() && i + 1 < n {
            return None;
        }
    }
    let value = total.value();
    if !(value.is_finite() && value > 0.0) {
        return None;
    }
    let rel_err_bound = f64::EPSILON * worst * n as f64 / value;
    if rel_err_bound > 1e-6 {
        return None;
    }
    Some(value)
}

/// E[X_n] = ∫ P(fewer than n arrivals by t) dt, the survival integral;
/// P(N(t) ≤ n-1) is the regularized upper incomplete gamma Q(n, Λ(t)).
fn nth_mean_survival_integral(a: f64, n: f64) -> f64 {
    let hi = (a * (n + 60.0 + 14.0 * n.sqrt())).ln_1p() / a;
    let f = |t: f64| {
        let mass = (a * t).exp_m1() / a;
        if mass <= 0.0 {
            1.0 // no expected arrivals yet, survival is certain
        } else {
            gamma_ur(n, mass)
        }
    };
    integrate(&f, 0.0, hi, 1e-11)
}

/// E[X_n] for rate λ(t) = a t: √(2/a) Γ(n+1/2)/Γ(n).
pub fn expected_nth_arrival_linear(a: f64, n: u64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Parameter(format!("slope {a} must be > 0")));
    }
    if n == 0 {
        return Err(Error::Parameter("arrival index starts at 1".into()));
    }
    let nf = n as f64;
    Ok((2.0 / a).sqrt() * (ln_gamma(nf + 0.5) - ln_gamma(nf)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::RateFunction;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn scaled_e1_matches_integral_representation() {
        // e^x E1(x) = ∫_0^∞ e^{-u}/(u+x) du
        for x in [0.3, 1.0, 5.0, 20.0] {
            let direct = e1_scaled(x);
            let quad = integrate(&|u: f64| (-u).exp() / (u + x), 0.0, 80.0, 1e-12);
            assert_relative_eq!(direct, quad, max_relative = 1e-10);
        }
        assert_relative_eq!(e1_scaled(1.0), 0.596_347_362_323_194, max_relative = 1e-13);
    }

    #[test]
    fn ei_reference_values() {
        let cases = [
            (1.0, 1.895_117_816_355_936_8),
            (2.0, 4.954_234_356_001_890),
            (5.0, 40.185_275_355_803_18),
            (40.0, 6_039_718_263_611_241.6),
            (41.0, 1.600_664_914_324_504_1e16),
            (45.0, 7.943_916_035_704_453_8e17),
            (50.0, 1.058_563_689_713_169_1e20),
            (100.0, 2.715_552_744_853_879_8e41),
            (700.0, 1.450_978_736_052_560_9e301),
            (0.5, 0.454_219_904_863_173_58),
            (0.1, -1.622_812_813_969_276_6),
            (-0.1, -1.822_923_958_419_390_6),
            (-0.5, -0.559_773_594_776_160_8),
            (-1.0, -0.219_383_934_395_520_27),
            (-2.0, -0.048_900_510_708_061_12),
            (-5.0, -0.001_148_295_591_275_325_8),
            (-40.0, -1.036_773_261_451_657e-19),
        ];
        for (x, want) in cases {
            let got = exponential_integral_ei(x).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn ei_singularity_and_zero_crossing() {
        assert!(matches!(
            exponential_integral_ei(0.0),
            Err(Error::Domain(_))
        ));
        assert!(exponential_integral_ei(0.37).unwrap() < 0.0);
        assert!(exponential_integral_ei(0.38).unwrap() > 0.0);
    }

    #[test]
    fn ei_diverges_monotonically_from_the_left() {
        let mut prev = exponential_integral_ei(-0.1).unwrap();
        for x in [-1e-2, -1e-3, -1e-4, -1e-5] {
            let v = exponential_integral_ei(x).unwrap();
            assert!(v < prev, "Ei({x}) = {v} not below {prev}");
            prev = v;
        }
        assert!(prev < -10.0);
    }

    #[test]
    fn nth_mean_reference_values() {
        // stable region of the closed form
        let closed = [
            (0.5, 2, 1.277_342_766_223_554_8),
            (1.0, 3, 1.298_173_681_161_597_4),
            (0.1, 3, 2.540_966_915_313_119_6),
            (2.0, 5, 1.157_601_793_448_84),
            (0.1, 5, 3.949_301_764_783_318),
            (1.0, 1, 0.596_347_362_323_194),
            (1.0, 20, 3.021_748_363_606_656_8),
            (1.0, 50, 3.922_188_218_743_557_6),
            (0.1, 50, 17.848_250_436_499_324),
        ];
        for (a, n, want) in closed {
            let got = expected_nth_arrival_exponential(a, n).unwrap();
            assert_relative_eq!(got.value, want, max_relative = 1e-8);
        }
        // cancellation regime answered by the survival integral
        let deep = [(0.01, 50, 40.436_012_622_120_314), (0.01, 5, 4.856_607_935_214_883_3)];
        for (a, n, want) in deep {
            let got = expected_nth_arrival_exponential(a, n).unwrap();
            assert_relative_eq!(got.value, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn fallback_engages_exactly_when_the_sum_cancels() {
        assert!(!expected_nth_arrival_exponential(1.0, 5).unwrap().by_quadrature);
        assert!(!expected_nth_arrival_exponential(0.5, 10).unwrap().by_quadrature);
        assert!(expected_nth_arrival_exponential(0.01, 50).unwrap().by_quadrature);
        assert!(expected_nth_arrival_exponential(1e-6, 20).unwrap().by_quadrature);
    }

    #[test]
    fn nth_mean_is_positive_and_increasing() {
        let mut prev = 0.0;
        for n in 1..=30 {
            let v = expected_nth_arrival_exponential(0.5, n).unwrap().value;
            assert!(v > prev, "n={n}: {v} <= {prev}");
            prev = v;
        }
    }

    #[test]
    fn vanishing_growth_recovers_the_block_index() {
        for n in 1..=20u64 {
            let v = expected_nth_arrival_exponential(1e-6, n).unwrap().value;
            assert!((v - n as f64).abs() <= 1e-3, "n={n}: {v}");
        }
    }

    #[test]
    fn parameter_guards() {
        assert!(expected_nth_arrival_exponential(0.0, 5).is_err());
        assert!(expected_nth_arrival_exponential(-1.0, 5).is_err());
        assert!(expected_nth_arrival_exponential(1.0, 0).is_err());
        assert!(expected_nth_arrival_exponential(1.0, 2017).is_err());
        assert!(expected_nth_arrival_linear(0.0, 1).is_err());
        assert!(expected_nth_arrival_linear(1.0, 0).is_err());
    }

    #[test]
    fn deterministic_count_time_tracks_the_mean_for_slow_growth() {
        // z_n inverts the cumulative intensity; for a = 0.1 it sits
        // within 2% of E[X_n] from n = 10 on, and drifts wider below
        let rate = RateFunction::Exponential { a: 0.1, b: 0.0 };
        for n in [10u64, 20, 50, 100, 200] {
            let z = rate.invert_intensity(0.0, n as f64).unwrap();
            let e = expected_nth_arrival_exponential(0.1, n).unwrap().value;
            let dev = (z - e).abs() / e;
            assert!(dev < 0.02, "n={n}: dev {dev}");
        }
        let z1 = rate.invert_intensity(0.0, 1.0).unwrap();
        let e1 = expected_nth_arrival_exponential(0.1, 1).unwrap().value;
        let dev1 = (z1 - e1).abs() / e1;
        assert!(dev1 > 0.02 && dev1 < 0.06, "n=1 dev {dev1}");
    }

    #[test]
    fn linear_rate_mean_closed_form() {
        for a in [0.2, 1.0, 3.0] {
            let first = expected_nth_arrival_linear(a, 1).unwrap();
            assert_relative_eq!(first, (PI / (2.0 * a)).sqrt(), max_relative = 1e-13);
        }
        assert_relative_eq!(
            expected_nth_arrival_linear(1.0, 2).unwrap(),
            1.879_971_205_973_250_5,
            max_relative = 1e-12
        );
        // quadrature of t · density
        for (a, n) in [(0.5, 1u64), (1.0, 2), (0.5, 10)] {
            let rate = RateFunction::Linear { a };
            let f = |t: f64| t * rate.nth_arrival_density(n, t).unwrap();
            let hi = (2.0 * (n as f64 + 60.0) / a).sqrt();
            let quad = integrate(&f, 0.0, hi, 1e-11);
            assert_relative_eq!(
                expected_nth_arrival_linear(a, n).unwrap(),
                quad,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn linear_rate_mean_scales_and_grows() {
        let base = expected_nth_arrival_linear(0.3, 7).unwrap();
        let scaled = expected_nth_arrival_linear(1.2, 7).unwrap();
        assert_relative_eq!(scaled, base / 2.0, max_relative = 1e-12);
        let mut prev = 0.0;
        for n in 1..=40 {
            let v = expected_nth_arrival_linear(0.3, n).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }
}
