//! Concentration of the received count and fixed-count sandwich bounds.
//!
//! Under the Poisson model the number `N` of received symbols concentrates
//! around its mean `n`:
//!
//! ```text
//! Pr[N ≥ n + Δ] ≤ exp(−Δ² / (2(n + Δ/3))),    Pr[N ≤ n − Δ] ≤ exp(−Δ² / (2n)).
//! ```
//!
//! Decoding success is monotone in the received set, so these tails convert
//! Poisson-model probabilities at `n1 ≤ n ≤ n2` into bounds for exactly `n`
//! received symbols.

use serde::Serialize;

use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};
use crate::finite_length::{failure_probability, FiniteOptions};
use crate::sampler::CodeParameters;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub n: f64,
    pub delta_dev: f64,
    /// Bound on `Pr[N ≥ n + Δ]`.
    pub upper_tail: f64,
    /// Bound on `Pr[N ≤ n − Δ]`.
    pub lower_tail: f64,
}

pub fn tail_bounds(n: f64, delta_dev: f64) -> Result<TailBound> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!("mean count must be positive, got {n}")));
    }
    if !(delta_dev >= 0.0) {
        return Err(Error::InvalidParameter(format!("deviation must be nonnegative, got {delta_dev}")));
    }
    let d2 = delta_dev * delta_dev;
    Ok(TailBound {
        n,
        delta_dev,
        upper_tail: (-d2 / (2.0 * (n + delta_dev / 3.0))).exp(),
        lower_tail: (-d2 / (2.0 * n)).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichResult {
    pub n: f64,
    pub n1: f64,
    pub n2: f64,
    pub lower: f64,
    pub upper: f64,
    /// `lower ≤ upper`.
    pub consistent: bool,
    /// `n2 = n`: the upper bound's denominator vanishes and `upper` is 1.
    pub degenerate: bool,
}

impl SandwichResult {
    /// `{"lower": .., "upper": .., "consistent": ..}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "lower": self.lower, "upper": self.upper, "consistent": self.consistent }).to_string()
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be a probability, got {p}")))
    }
}

fn check_window(n: f64, n1: f64, n2: f64) -> Result<()> {
    if !(n1 >= 0.0 && n1 <= n && n <= n2 && n2.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 ≤ n1 ≤ n ≤ n2, got n1={n1}, n={n}, n2={n2}")));
    }
    if n <= 0.0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    Ok(())
}

/// ```text
/// lower = max(0, P(n1) − exp(−3(n − n1)² / (2(2·n1 + n))))
/// upper = min(1, P(n2) / (1 − exp(−(n2 − n)² / (2·n2))))
/// ```
///
/// `P` is a probability that can only grow with the number of received
/// symbols, such as the probability of successful decoding. The result then
/// brackets the same probability for exactly `n` symbols.
pub fn sandwich(p_p_n1: f64, p_p_n2: f64, n: f64, n1: f64, n2: f64) -> Result<SandwichResult> {
    check_prob("P(n1)", p_p_n1)?;
    check_prob("P(n2)", p_p_n2)?;
    check_window(n, n1, n2)?;
    let lower = (p_p_n1 - (-3.0 * (n - n1).powi(2) / (2.0 * (2.0 * n1 + n))).exp()).max(0.0);
    let degenerate = n2 == n;
    let upper = if degenerate {
        1.0
    } else {
        (p_p_n2 / (1.0 - (-(n2 - n).powi(2) / (2.0 * n2)).exp())).min(1.0)
    };
    Ok(SandwichResult { n, n1, n2, lower, upper, consistent: lower <= upper, degenerate })
}

/// The `n ± 3√n` window, with `n1` clipped at zero.
pub fn default_window(n: f64) -> (f64, f64) {
    let w = 3.0 * n.sqrt();
    ((n - w).max(0.0), n + w)
}

/// Bounds on the failure probability with exactly `n` received symbols.
///
/// Success probability grows with the number of received symbols, so the
/// sandwich is built for it from the Poisson-model values at `n1` and `n2`
/// and then complemented. In the result, `lower` is therefore
/// `1 − upper_success` and `upper` is `1 − lower_success`.
pub fn failure_sandwich_from(p_fail_n1: f64, p_fail_n2: f64, n: f64, n1: f64, n2: f64) -> Result<SandwichResult> {
    let s = sandwich(1.0 - p_fail_n1, 1.0 - p_fail_n2, n, n1, n2)?;
    let lower = 1.0 - s.upper;
    let upper = 1.0 - s.lower;
    Ok(SandwichResult { lower, upper, consistent: lower <= upper, ..s })
}

/// [`failure_sandwich_from`] with the Poisson-model failure probabilities
/// computed by the finite-length engine.
pub fn failure_sandwich(
    dist: &DegreeDistribution,
    k: usize,
    n: f64,
    window: Option<(f64, f64)>,
    opts: &FiniteOptions,
) -> Result<SandwichResult> {
    let (n1, n2) = window.unwrap_or_else(|| default_window(n));
    check_window(n, n1, n2)?;
    let f1 = failure_probability(dist, &CodeParameters::new(k, n1)?, opts)?.p_error;
    let f2 = failure_probability(dist, &CodeParameters::new(k, n2)?, opts)?.p_error;
    failure_sandwich_from(f1, f2, n, n1, n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tails() {
        let t = tail_bounds(100.0, 0.0).unwrap();
        assert_eq!((t.upper_tail, t.lower_tail), (1.0, 1.0));
        let t = tail_bounds(100.0, 30.0).unwrap();
        assert_relative_eq!(t.upper_tail, 0.016724022988470442, max_relative = 1e-14);
        assert_relative_eq!(t.lower_tail, 0.011108996538242306, max_relative = 1e-14);
        let mut last = (1.0, 1.0);
        for i in 1..50 {
            let t = tail_bounds(100.0, i as f64 * 2.0).unwrap();
            assert!(t.upper_tail < last.0 && t.lower_tail < last.1);
            last = (t.upper_tail, t.lower_tail);
        }
        assert!(tail_bounds(100.0, 1e4).unwrap().upper_tail < 1e-100);
        assert!(tail_bounds(0.0, 1.0).is_err());
        assert!(tail_bounds(10.0, -1.0).is_err());
    }

    #[test]
    fn sandwich_example() {
        let s = sandwich(0.3, 0.1, 120.0, 100.0, 140.0).unwrap();
        assert_relative_eq!(s.lower, 0.14664503315507152, max_relative = 1e-13);
        assert_relative_eq!(s.upper, 0.13151855896801315, max_relative = 1e-13);
        assert!(!s.consistent);
        assert!(!s.degenerate);
    }

    #[test]
    fn degenerate_window() {
        let s = sandwich(0.4, 0.4, 50.0, 50.0, 50.0).unwrap();
        assert_eq!(s.lower, 0.0);
        assert_eq!(s.upper, 1.0);
        assert!(s.degenerate && s.consistent);
    }

    #[test]
    fn wide_window_corrections_vanish() {
        let n: f64 = 1e4;
        let w = 5.0 * n.sqrt();
        let s = sandwich(0.6, 0.5, n, n - w, n + w).unwrap();
        assert!((s.lower - 0.6).abs() < 1e-5);
        assert!((s.upper - 0.5).abs() < 1e-5);
    }

    #[test]
    fn validation() {
        assert!(sandwich(1.2, 0.1, 10.0, 5.0, 15.0).is_err());
        assert!(sandwich(0.2, 0.1, 10.0, 12.0, 15.0).is_err());
        assert!(sandwich(0.2, 0.1, 10.0, 5.0, 9.0).is_err());
    }

    #[test]
    fn failure_domain() {
        let s = failure_sandwich_from(0.4, 0.1, 110.0, 80.0, 140.0).unwrap();
        let succ = sandwich(0.6, 0.9, 110.0, 80.0, 140.0).unwrap();
        assert_relative_eq!(s.lower, 1.0 - succ.upper);
        assert_relative_eq!(s.upper, 1.0 - succ.lower);
        assert!(s.lower <= s.upper);
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 3);
    }

    #[test]
    fn engine_backed_bounds_bracket_poisson_value() {
        let k = 60;
        let d = DegreeDistribution::soliton_robust(k, 0.1, 0.5).unwrap();
        let s = failure_sandwich(&d, k, 70.0, None, &FiniteOptions::default()).unwrap();
        let mid = failure_probability(&d, &CodeParameters::new(k, 70.0).unwrap(), &FiniteOptions::default()).unwrap();
        assert!(s.consistent);
        assert!(s.lower <= mid.p_error + 0.2 && mid.p_error - 0.2 <= s.upper);
        let (n1, n2) = default_window(70.0);
        assert_relative_eq!(s.n1, n1);
        assert_relative_eq!(s.n2, n2);
    }
}
