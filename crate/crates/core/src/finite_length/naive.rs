use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};
use crate::numeric::{binomial_pmf, binomial_pmf_ln};
use crate::sampler::CodeParameters;

use super::{precompute_q, Engine, FiniteLengthResult, QTransferParams, QVector};

pub const DEFAULT_NAIVE_MAX_K: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveOptions {
    pub max_k: usize,
    /// Keep every row instead of only the two being swept.
    pub full_table: bool,
}

impl Default for NaiveOptions {
    fn default() -> Self {
        Self { max_k: DEFAULT_NAIVE_MAX_K, full_table: false }
    }
}

pub fn dp_naive(dist: &DegreeDistribution, params: &CodeParameters) -> Result<FiniteLengthResult> {
    dp_naive_with(dist, params, &NaiveOptions::default())
}

pub fn dp_naive_with(
    dist: &DegreeDistribution,
    params: &CodeParameters,
    opts: &NaiveOptions,
) -> Result<FiniteLengthResult> {
    if params.k > opts.max_k {
        return Err(Error::KTooLarge { k: params.k, limit: opts.max_k });
    }
    let tp = precompute_q(dist, params)?;
    Ok(sweep(&tp, opts.full_table))
}

fn row_dev(row: &[f64]) -> f64 {
    (row.iter().sum::<f64>() - 1.0).abs()
}

pub(super) fn sweep(tp: &QTransferParams, keep: bool) -> FiniteLengthResult {
    let k = tp.k;
    let mut cur = binomial_pmf(k as u64, tp.p1);
    let mut max_dev = row_dev(&cur);
    let mut table = keep.then(Vec::new);
    let mut next = Vec::with_capacity(k);

    for u in (2..=k).rev() {
        if let Some(t) = table.as_mut() {
            t.push(QVector { u, probs: cur.clone() });
        }
        let (ln_q, ln_c) = tp.logs(u);
        next.clear();
        next.resize(u, 0.0);
        next[0] = cur[0];
        for (s, &mass) in cur.iter().enumerate().skip(1) {
            if mass == 0.0 {
                continue;
            }
            // s−1 remain in the ripple; j of the u−s outside symbols join.
            let pmf = binomial_pmf_ln((u - s) as u64, ln_q, ln_c);
            for (j, &w) in pmf.iter().enumerate() {
                next[s - 1 + j] += mass * w;
            }
        }
        max_dev = max_dev.max(row_dev(&next));
        std::mem::swap(&mut cur, &mut next);
    }
    let p_error = cur[0].clamp(0.0, 1.0);
    if let Some(t) = table.as_mut() {
        t.push(QVector { u: 1, probs: cur });
    }
    FiniteLengthResult { p_error, engine: Engine::Naive, row_sum_max_dev: max_dev, full_table: table }
}
