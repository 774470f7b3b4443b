//! Log-domain combinatorics shared by the samplers and the analytic engines.

use std::sync::OnceLock;

const TABLE_LEN: usize = 1024;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Neumaier-compensated running sum of ln(i).
        let mut t = Vec::with_capacity(TABLE_LEN);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        t.push(0.0);
        for i in 1..TABLE_LEN {
            let x = (i as f64).ln();
            let s = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - s) + x;
            } else {
                comp += (x - s) + sum;
            }
            sum = s;
            t.push(sum + comp);
        }
        t
    })
}

/// `ln(n!)`: table lookup below 1024, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        return ln_factorial_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

/// `ln C(n, j)`; `-inf` when `j > n`.
pub fn ln_choose(n: u64, j: u64) -> f64 {
    if j > n {
        return f64::NEG_INFINITY;
    }
    let j = j.min(n - j);
    if j == 0 {
        return 0.0;
    }
    if j <= 32 {
        // Direct sum avoids cancellation between two large log-factorials.
        let mut s = 0.0;
        for i in 0..j {
            s += ((n - i) as f64).ln();
        }
        return s - ln_factorial(j);
    }
    ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j)
}

/// Exact `C(n, j)` when it fits in a `u128`.
pub fn choose_exact(n: u64, j: u64) -> Option<u128> {
    if j > n {
        return Some(0);
    }
    let j = j.min(n - j);
    let mut acc: u128 = 1;
    for i in 0..j {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `C(n, j)` as a float, exact below 2^53 and via logs beyond.
pub fn choose_f64(n: u64, j: u64) -> f64 {
    match choose_exact(n, j) {
        Some(c) if c < (1u128 << 53) => c as f64,
        _ => ln_choose(n, j).exp(),
    }
}

/// Stable `ln(1 - x)` for `x` in `[0, 1]`.
pub fn ln_one_minus(x: f64) -> f64 {
    (-x).ln_1p()
}

/// Full pmf of `Binomial(m, q)` given `ln q` and `ln(1 - q)`.
///
/// Both logs are passed explicitly so that callers holding an accurate
/// `ln(1 - q)` (for `q` close to 0 or 1) do not lose it to rounding.
pub fn binomial_pmf_ln(m: u64, ln_q: f64, ln_c: f64) -> Vec<f64> {
    let len = m as usize + 1;
    let mut out = vec![0.0; len];
    if ln_q == f64::NEG_INFINITY {
        out[0] = 1.0;
        return out;
    }
    if ln_c == f64::NEG_INFINITY {
        out[len - 1] = 1.0;
        return out;
    }
    let lf_m = ln_factorial(m);
    for (j, slot) in out.iter_mut().enumerate() {
        let j = j as u64;
        let e = lf_m - ln_factorial(j) - ln_factorial(m - j) + j as f64 * ln_q + (m - j) as f64 * ln_c;
        *slot = e.exp();
    }
    out
}

/// Pmf of `Binomial(m, p)` from the plain probability.
pub fn binomial_pmf(m: u64, p: f64) -> Vec<f64> {
    let ln_q = if p <= 0.0 { f64::NEG_INFINITY } else { p.ln() };
    let ln_c = if p >= 1.0 { f64::NEG_INFINITY } else { ln_one_minus(p) };
    binomial_pmf_ln(m, ln_q, ln_c)
}

/// `x · 2^e` without intermediate overflow or underflow for moderate `x`.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn factorials_match_exact_products() {
        let mut f = 1.0f64;
        for n in 1..=25u64 {
            f *= n as f64;
            assert_relative_eq!(ln_factorial(n), f.ln(), max_relative = 1e-14);
        }
        // Stirling branch continues the table smoothly.
        let tail = ln_factorial(1023) + (1024f64).ln();
        assert_relative_eq!(ln_factorial(1024), tail, max_relative = 1e-14);
    }

    #[test]
    fn choose_small_values() {
        assert_eq!(choose_exact(4, 2), Some(6));
        assert_eq!(choose_exact(3, 5), Some(0));
        assert_eq!(choose_exact(100, 50), Some(100891344545564193334812497256));
        assert_eq!(choose_f64(10, 3), 120.0);
        assert_relative_eq!(ln_choose(100, 50), (100891344545564193334812497256f64).ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_choose(10_000, 3), (166_616_670_000f64).ln(), max_relative = 1e-14);
        assert_eq!(ln_choose(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn binomial_pmf_sums_to_one_and_handles_edges() {
        let pmf = binomial_pmf(3, 0.5);
        for (a, b) in pmf.iter().zip([0.125, 0.375, 0.375, 0.125]) {
            assert_relative_eq!(*a, b, max_relative = 1e-14);
        }
        assert_eq!(binomial_pmf(4, 0.0), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(binomial_pmf(2, 1.0), vec![0.0, 0.0, 1.0]);
        let s: f64 = binomial_pmf(500, 0.013).iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ldexp_round_trips() {
        assert_eq!(ldexp(1.5, 3), 12.0);
        assert_eq!(ldexp(1.0, -1074), 5e-324);
        assert!(ldexp(0.75, 2000).is_infinite());
        assert_eq!(ldexp(1.0, -1100), 0.0);
    }
}
