//! Limiting recoverable fraction of the peeling decoder.
//!
//! With `n = (1+δ)k`, define `β_1 = −ln(1 − (1+δ)Ω_1)` and `β_d = (1+δ)Ω_d`
//! for `d ≥ 2`, and `F(t) = β'(t) + ln(1 − t)`. As `k → ∞` the decoded
//! fraction converges to `z* = inf{t ∈ [0,1) : F(t) < 0} ∧ 1`, provided `F`
//! has no root in `[0, z*)`.

use std::io::Write;

use serde::Serialize;

use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_GRID_POINTS: usize = 10_000;
/// Right end of the scan; `ln(1 − t)` diverges at 1.
pub const RIGHT_GUARD: f64 = 1e-12;
/// Sampled `|F|` at or below this counts as touching zero.
pub const TOUCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BetaSeries {
    pub delta: f64,
    /// `(d, β_d)` for every degree in the support.
    pub coefficients: Vec<(usize, f64)>,
    /// Dense coefficients of `β'(t)`: entry `j` is `(j+1)·β_{j+1}`.
    derivative: Vec<f64>,
}

impl BetaSeries {
    pub fn new(dist: &DegreeDistribution, delta: f64) -> Result<Self> {
        if !(delta >= -1.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("overhead must be at least -1, got {delta}")));
        }
        let scale = 1.0 + delta;
        let omega1 = dist.weight(1);
        if scale * omega1 >= 1.0 {
            return Err(Error::DegreeOneSaturated(scale * omega1));
        }
        let mut coefficients = Vec::with_capacity(dist.support().len());
        let mut derivative = vec![0.0; dist.max_degree()];
        for &(d, w) in dist.support() {
            let b = if d == 1 { -(-scale * w).ln_1p() } else { scale * w };
            coefficients.push((d, b));
            derivative[d - 1] = d as f64 * b;
        }
        Ok(Self { delta, coefficients, derivative })
    }

    pub fn beta1(&self) -> f64 {
        self.coefficients.iter().find(|&&(d, _)| d == 1).map_or(0.0, |&(_, b)| b)
    }

    /// `β(t) = Σ β_d t^d`.
    pub fn beta(&self, t: f64) -> f64 {
        self.coefficients.iter().map(|&(d, b)| b * t.powi(d as i32)).sum()
    }

    /// `β'(t)` by Horner's rule.
    pub fn beta_prime(&self, t: f64) -> f64 {
        self.derivative.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// `F(t) = β'(t) + ln(1 − t)`.
    pub fn collapse_function(&self, t: f64) -> f64 {
        self.beta_prime(t) + (-t).ln_1p()
    }
}

pub fn beta_series(dist: &DegreeDistribution, delta: f64) -> Result<BetaSeries> {
    BetaSeries::new(dist, delta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticResult {
    pub z_star: f64,
    /// No root of `F` was found in `[0, z*)`.
    pub hypotheses_hold: bool,
    pub f_at_z_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_samples: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_note: Option<String>,
}

/// Locates `z*` by a uniform sign scan of `F` followed by bisection.
///
/// The scan finds the first grid cell where `F` turns negative; bisection
/// then shrinks that cell below `tol` keeping `F(lo) ≥ 0 > F(hi)`.
pub fn collapse_fraction(series: &BetaSeries, tol: f64, grid_points: usize) -> Result<AsymptoticResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if grid_points < 100 {
        return Err(Error::InvalidParameter(format!("grid_points must be at least 100, got {grid_points}")));
    }
    let t_max = 1.0 - RIGHT_GUARD;
    let step = t_max / grid_points as f64;
    let grid: Vec<f64> = (0..=grid_points).map(|i| if i == grid_points { t_max } else { i as f64 * step }).collect();
    let values: Vec<f64> = grid.iter().map(|&t| series.collapse_function(t)).collect();

    let first_negative = values.iter().position(|&f| f < 0.0);
    let mut notes: Vec<String> = Vec::new();
    let (z_star, scan_end) = match first_negative {
        Some(0) => (0.0, 0),
        Some(i) => {
            let (mut lo, mut hi) = (grid[i - 1], grid[i]);
            while hi - lo >= tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if series.collapse_function(mid) < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            (0.5 * (lo + hi), i)
        }
        None => {
            notes.push(format!("F stays nonnegative up to t = 1 - {RIGHT_GUARD:e}; z* reported as 1"));
            (1.0, grid.len())
        }
    };

    let mut hypotheses_hold = true;
    if series.beta1() == 0.0 && values[0].abs() <= 1e-15 && z_star > tol {
        hypotheses_hold = false;
        notes.push("F(0) = 0: no degree-one symbols, so decoding cannot start; z* is not the limit".into());
    }
    if let Some(t) = find_touch(series, &grid, &values, scan_end) {
        hypotheses_hold = false;
        notes.push(format!("F touches zero near t = {t:.6} below z*"));
    }

    Ok(AsymptoticResult {
        z_star,
        hypotheses_hold,
        f_at_z_star: if z_star < 1.0 { series.collapse_function(z_star) } else { f64::NEG_INFINITY },
        f_samples: None,
        boundary_note: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

/// Looks for a local minimum of `F` with value ≤ [`TOUCH_TOL`] among the
/// grid cells strictly before the first sign change.
fn find_touch(series: &BetaSeries, grid: &[f64], values: &[f64], end: usize) -> Option<f64> {
    let end = end.min(values.len());
    for j in 1..end.saturating_sub(1) {
        if values[j] <= values[j - 1] && values[j] <= values[j + 1] {
            let (t, f) = golden_min(|t| series.collapse_function(t), grid[j - 1], grid[j + 1]);
            if f <= TOUCH_TOL {
                return Some(t);
            }
        }
    }
    None
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `(t, (1 − t)·F(t))` for each grid point in `[0, 1)`.
pub fn ripple_fraction_curve(series: &BetaSeries, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&t| {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::OutOfRange(t));
            }
            Ok((t, (1.0 - t) * series.collapse_function(t)))
        })
        .collect()
}

/// CSV with header `t,F,ripple_fraction`.
pub fn write_curve_csv<W: Write>(series: &BetaSeries, grid: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "t,F,ripple_fraction")?;
    for (t, r) in ripple_fraction_curve(series, grid)? {
        writeln!(out, "{t},{},{r}", series.collapse_function(t))?;
    }
    Ok(())
}
