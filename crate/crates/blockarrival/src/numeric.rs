//! Small numeric toolbox: Lambert W, adaptive quadrature, bracketed
//! root finding, compensated summation.

use crate::error::{Error, Result};

/// Principal branch W0 of w e^w = x, for x >= -1/e.
///
/// Region-dependent starting guess, then Halley iteration on
/// f(w) = w e^w - x until the step stalls at machine precision.
pub fn lambert_w(x: f64) -> Result<f64> {
    const NEG_INV_E: f64 = -0.367_879_441_171_442_33;
    if !x.is_finite() {
        return Err(Error::Domain(format!("lambert_w of {x}")));
    }
    if x < NEG_INV_E {
        // allow round-off dust below the branch point
        if x > NEG_INV_E * (1.0 + 1e-12) {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!(
            "lambert_w principal branch needs x >= -1/e, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let mut w = if x < -0.25 {
        // series around the branch point in p = sqrt(2(ex+1))
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else if x < std::f64::consts::E {
        x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln() * (1.0 - 1.0 / l)
    };

    // near the branch point the residual is quadratically flat, so the
    // steps bottom out at sqrt(eps) noise instead of eps; exit when
    // they stop shrinking
    let mut prev_step = f64::INFINITY;
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        // Halley step
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if !(denom.is_finite() && denom != 0.0) {
            return Ok(w);
        }
        let dw = f / denom;
        w -= dw;
        if dw.abs() <= 1e-16 * (1.0 + w.abs()) || dw.abs() >= prev_step {
            return Ok(w);
        }
        prev_step = dw.abs();
    }
    Err(Error::Numeric(format!("lambert_w({x}) did not converge")))
}

/// Adaptive Simpson integration of `f` over [a, b] to relative
/// tolerance `rel_tol`.
///
/// The absolute budget is sized against a 64-panel composite estimate,
/// not the single top-level panel: a narrow peak that the three
/// endpoint samples miss would otherwise shrink the budget by orders
/// of magnitude and stall the refinement.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let panels = 64;
    let h = (b - a) / panels as f64;
    let mut coarse = 0.0;
    let mut x0 = a;
    let mut f0 = fa;
    for i in 0..panels {
        let x1 = if i == panels - 1 { b } else { a + (i + 1) as f64 * h };
        let f1 = if i == panels - 1 { fb } else { f(x1) };
        coarse += (x1 - x0) / 6.0 * (f0 + 4.0 * f(0.5 * (x0 + x1)) + f1);
        x0 = x1;
        f0 = f1;
    }
    let scale = coarse.abs().max(whole.abs()).max(1e-300);
    simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    abs_tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * abs_tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, abs_tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, abs_tol / 2.0, depth - 1)
}

/// Root of a continuous function with a sign change on [lo, hi],
/// by bisection. Converges to relative width `xtol_rel`.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, xtol_rel: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numeric(format!(
            "no sign change on [{lo}, {hi}] (f: {flo} .. {fhi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol_rel * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
