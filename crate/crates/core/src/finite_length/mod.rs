//! Exact decoding-failure probability under the Poisson model.
//!
//! `X_u` is the ripple size when `u` input symbols remain undecoded and
//! `Q(u, r) = Pr[X_u = r]`. Decoding one ripple symbol at step `u` makes each
//! of the `u − X_u` symbols outside the ripple join it independently with
//! probability `q_u`, so
//!
//! ```text
//! Q(u−1, r) = Σ_{s=1}^{r+1} Q(u, s) · C(u−s, r−s+1) · q_u^{r−s+1} · (1−q_u)^{u−r−1}
//! ```
//!
//! for `r ≥ 1`, with `Q(u−1, 0) = Q(u, 0) + Q(u, 1)·(1−q_u)^{u−1}` absorbing
//! the runs whose ripple emptied. The failure probability is `Q(1, 0)`.
//!
//! Two engines compute it: [`dp_naive`], a direct `O(k³)` sweep, and
//! [`dp_poly`], which carries the generating polynomial of each row through
//! evaluation/interpolation at roots of unity in extended precision.
//! [`brute_force_exact`] enumerates every reception pattern for `k ≤ 4`.

mod brute;
mod naive;
mod poly;
mod transfer;

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::degree_dist::DegreeDistribution;
use crate::error::Result;
use crate::sampler::CodeParameters;

pub use brute::{brute_force_exact, BRUTE_FORCE_MAX_K};
pub use naive::{dp_naive, dp_naive_with, NaiveOptions, DEFAULT_NAIVE_MAX_K};
pub use poly::{dp_poly, dp_poly_with, DEFAULT_PRECISION_BITS, PRECISION_LOSS_THRESHOLD};
pub use transfer::{precompute_q, precompute_q_with_table, QTransferParams};

/// Largest `k` for which [`EngineChoice::Auto`] picks the naive engine.
pub const AUTO_NAIVE_MAX_K: usize = 300;

/// One row of the ripple-size distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct QVector {
    pub u: usize,
    /// `probs[r] = Q(u, r)` for `r = 0..=u`.
    pub probs: Vec<f64>,
}

impl QVector {
    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Naive,
    Poly,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Naive => "naive",
            Engine::Poly => "poly",
        }
    }
}

impl Serialize for Engine {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineChoice {
    /// Naive up to [`AUTO_NAIVE_MAX_K`], polynomial above.
    #[default]
    Auto,
    Naive,
    Poly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteLengthResult {
    pub p_error: f64,
    pub engine: Engine,
    /// Largest `|Σ_r Q(u, r) − 1|` over all rows.
    pub row_sum_max_dev: f64,
    /// Rows from `u = k` down to `u = 1`, when requested.
    #[serde(skip)]
    pub full_table: Option<Vec<QVector>>,
}

impl FiniteLengthResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// CSV with header `u,r,Q`; empty body when no table was kept.
    pub fn write_table_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "u,r,Q")?;
        for row in self.full_table.iter().flatten() {
            for (r, q) in row.probs.iter().enumerate() {
                writeln!(out, "{},{},{:.17e}", row.u, r, q)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteOptions {
    pub engine: EngineChoice,
    pub precision_bits: u32,
    pub full_table: bool,
    pub naive_max_k: usize,
}

impl Default for FiniteOptions {
    fn default() -> Self {
        Self {
            engine: EngineChoice::Auto,
            precision_bits: DEFAULT_PRECISION_BITS,
            full_table: false,
            naive_max_k: DEFAULT_NAIVE_MAX_K,
        }
    }
}

/// Runs the selected engine.
pub fn failure_probability(
    dist: &DegreeDistribution,
    params: &CodeParameters,
    opts: &FiniteOptions,
) -> Result<FiniteLengthResult> {
    let naive = || dp_naive_with(dist, params, &NaiveOptions { max_k: opts.naive_max_k, full_table: opts.full_table });
    let poly = || dp_poly_with(dist, params, opts.precision_bits, opts.full_table);
    match opts.engine {
        EngineChoice::Naive => naive(),
        EngineChoice::Poly => poly(),
        EngineChoice::Auto if params.k <= AUTO_NAIVE_MAX_K => naive(),
        EngineChoice::Auto => poly(),
    }
}
