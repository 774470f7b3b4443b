//! Seeded simulation of the peeling decoder.
//!
//! Trial `i` draws its instance with seed `derive_seed(master, i)` and the
//! per-trial outcomes are aggregated in trial order, so reports are identical
//! for every worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};
use crate::peeling::peel;
use crate::rng::derive_seed;
use crate::sampler::{sample_fixed_count, sample_instance, CodeParameters};

pub const HISTOGRAM_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMode {
    /// Every subset independently present with probability `p_d`.
    #[default]
    Poisson,
    /// Exactly `round(n)` symbols with i.i.d. degrees; repeats allowed.
    FixedN,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub mode: SimulationMode,
    pub seed: u64,
    pub trials: u64,
    pub failures: u64,
    pub p_hat: f64,
    /// `3·√(p̂(1−p̂)/T)`.
    pub ci_halfwidth: f64,
    /// Set when `p̂` is 0 or 1 and the half-width carries no information.
    pub ci_degenerate: bool,
    pub decoded_fraction_mean: f64,
    pub decoded_fraction_stddev: f64,
    /// Ripple trajectories `(u, X_u)` of the first trials, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_samples: Option<Vec<Vec<(usize, usize)>>>,
}

impl SimulationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationOptions {
    pub trials: u64,
    pub seed: u64,
    pub mode: SimulationMode,
    /// Worker threads; `None` uses one per logical core.
    pub jobs: Option<usize>,
    /// Number of leading trials whose trajectories are kept in the report.
    pub keep_trajectories: usize,
}

impl SimulationOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, mode: SimulationMode::Poisson, jobs: None, keep_trajectories: 0 }
    }
}

struct Outcome {
    success: bool,
    fraction: f64,
    trajectory: Option<Vec<(usize, usize)>>,
}

fn run_trials(
    dist: &DegreeDistribution,
    params: &CodeParameters,
    opts: &SimulationOptions,
    want_trajectory: impl Fn(u64) -> bool + Sync,
) -> Result<Vec<Outcome>> {
    if opts.trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    if opts.jobs == Some(0) {
        return Err(Error::InvalidParameter("jobs must be at least 1".into()));
    }
    if opts.mode == SimulationMode::FixedN {
        dist.with_k(params.k)?;
    } else {
        params.presence_probs(dist)?;
    }
    let count = params.n.round() as usize;
    let trial = |i: u64| -> Result<Outcome> {
        let seed = derive_seed(opts.seed, i);
        let instance = match opts.mode {
            SimulationMode::Poisson => sample_instance(dist, params, seed)?,
            SimulationMode::FixedN => sample_fixed_count(dist, params.k, count, seed)?,
        };
        let r = peel(&instance);
        Ok(Outcome {
            success: r.success,
            fraction: r.decoded_fraction,
            trajectory: want_trajectory(i).then_some(r.ripple_trajectory),
        })
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    pool.install(|| (0..opts.trials).into_par_iter().map(trial).collect())
}

fn summarize(opts: &SimulationOptions, outcomes: &mut [Outcome]) -> SimulationReport {
    let t = outcomes.len() as u64;
    let failures = outcomes.iter().filter(|o| !o.success).count() as u64;
    let p_hat = failures as f64 / t as f64;
    let mean = outcomes.iter().map(|o| o.fraction).sum::<f64>() / t as f64;
    let var = if t > 1 {
        outcomes.iter().map(|o| (o.fraction - mean).powi(2)).sum::<f64>() / (t - 1) as f64
    } else {
        0.0
    };
    let samples: Vec<_> = outcomes
        .iter_mut()
        .take(opts.keep_trajectories)
        .filter_map(|o| o.trajectory.take())
        .collect();
    SimulationReport {
        mode: opts.mode,
        seed: opts.seed,
        trials: t,
        failures,
        p_hat,
        ci_halfwidth: 3.0 * (p_hat * (1.0 - p_hat) / t as f64).sqrt(),
        ci_degenerate: failures == 0 || failures == t,
        decoded_fraction_mean: mean,
        decoded_fraction_stddev: var.sqrt(),
        trajectory_samples: (opts.keep_trajectories > 0).then_some(samples),
    }
}

pub fn estimate_failure(
    dist: &DegreeDistribution,
    params: &CodeParameters,
    opts: &SimulationOptions,
) -> Result<SimulationReport> {
    let keep = opts.keep_trajectories as u64;
    let mut outcomes = run_trials(dist, params, opts, |i| i < keep)?;
    Ok(summarize(opts, &mut outcomes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedFractionProfile {
    pub report: SimulationReport,
    /// `(bin_lo, bin_hi, count)`; the last bin includes 1.
    pub histogram: Vec<(f64, f64, u64)>,
    /// `(u, mean X_u)` for `u = k..=1`; a stalled trial counts as `X_u = 0`
    /// for every later step.
    pub mean_trajectory: Vec<(usize, f64)>,
}

impl DecodedFractionProfile {
    /// CSV with header `bin_lo,bin_hi,count`.
    pub fn write_histogram_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin_lo,bin_hi,count")?;
        for &(lo, hi, c) in &self.histogram {
            writeln!(out, "{lo},{hi},{c}")?;
        }
        Ok(())
    }

    /// CSV with header `u,mean_X_u`.
    pub fn write_trajectory_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "u,mean_X_u")?;
        for &(u, x) in &self.mean_trajectory {
            writeln!(out, "{u},{x}")?;
        }
        Ok(())
    }
}

pub fn decoded_fraction_profile(
    dist: &DegreeDistribution,
    params: &CodeParameters,
    opts: &SimulationOptions,
) -> Result<DecodedFractionProfile> {
    let k = params.k;
    let mut outcomes = run_trials(dist, params, opts, |_| true)?;

    let mut counts = vec![0u64; HISTOGRAM_BINS];
    let mut sums = vec![0u64; k + 1];
    for o in &outcomes {
        let bin = ((o.fraction * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        counts[bin] += 1;
        for &(u, x) in o.trajectory.as_deref().unwrap_or(&[]) {
            sums[u] += x as u64;
        }
    }
    let t = outcomes.len() as f64;
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i as f64 / HISTOGRAM_BINS as f64, (i + 1) as f64 / HISTOGRAM_BINS as f64, c))
        .collect();
    let mean_trajectory = (1..=k).rev().map(|u| (u, sums[u] as f64 / t)).collect();
    let report = summarize(opts, &mut outcomes);
    Ok(DecodedFractionProfile { report, histogram, mean_trajectory })
}
