//! Brute-force oracles shared by the integration suites. Everything
//! here trades speed for obviousness; the library is checked against
//! these, never the other way around.

/// Membership in every longest non-decreasing subsequence, by direct
/// enumeration of all 2^n index subsets. Usable up to n = 20 or so.
pub fn brute_lis_intersection(values: &[i64]) -> Vec<bool> {
    let n = values.len();
    assert!(n >= 1 && n <= 20, "enumeration oracle limited to short inputs");
    let mut best_len = 0u32;
    let mut in_all: u32 = 0;
    for mask in 0u32..(1u32 << n) {
        let mut prev = i64::MIN;
        let mut len = 0u32;
        let mut ok = true;
        for (i, &v) in values.iter().enumerate() {
            if mask >> i & 1 == 1 {
                if v < prev {
                    ok = false;
                    break;
                }
                prev = v;
                len += 1;
            }
        }
        if !ok {
            continue;
        }
        if len > best_len {
            best_len = len;
            in_all = mask;
        } else if len == best_len {
            in_all &= mask;
        }
    }
    (0..n).map(|i| in_all >> i & 1 == 1).collect()
}

/// Composite Simpson quadrature, panel count doubled until two
/// consecutive estimates agree to `rel_tol`. Deliberately not the
/// library's adaptive integrator.
pub fn simpson_doubling<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    assert!(hi > lo);
    let mut panels = 64usize;
    let mut prev = simpson_fixed(&f, lo, hi, panels);
    loop {
        panels *= 2;
        let cur = simpson_fixed(&f, lo, hi, panels);
        if (cur - prev).abs() <= rel_tol * cur.abs() || panels >= 1 << 22 {
            return cur;
        }
        prev = cur;
    }
}

fn simpson_fixed<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}
