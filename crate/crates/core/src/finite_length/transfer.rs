use crate::degree_dist::DegreeDistribution;
use crate::error::Result;
use crate::sampler::CodeParameters;

/// Per-step join probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct QTransferParams {
    pub k: usize,
    /// `p_1`, the presence probability of each singleton.
    pub p1: f64,
    /// `q[u]` for `u = 1..=k`; `q[0]` is unused.
    pub q: Vec<f64>,
    /// `ln(1 − q_u)`, kept separately for accuracy when `q_u` is tiny.
    pub ln_one_minus_q: Vec<f64>,
    /// `(d, ln f(u, d) for u = 0..=k)` where `f(u, d) = (1 − p_d)^C(k−u, d−2)`.
    pub f_table: Option<Vec<(usize, Vec<f64>)>>,
}

impl QTransferParams {
    /// `(ln q_u, ln(1 − q_u))`.
    pub fn logs(&self, u: usize) -> (f64, f64) {
        let l = self.ln_one_minus_q[u];
        let q = self.q[u];
        (if q > 0.0 { q.ln() } else { f64::NEG_INFINITY }, l)
    }
}

pub fn precompute_q(dist: &DegreeDistribution, params: &CodeParameters) -> Result<QTransferParams> {
    build(dist, params, false)
}

/// Like [`precompute_q`], also keeping every `ln f(u, d)`.
pub fn precompute_q_with_table(dist: &DegreeDistribution, params: &CodeParameters) -> Result<QTransferParams> {
    build(dist, params, true)
}

fn build(dist: &DegreeDistribution, params: &CodeParameters, keep: bool) -> Result<QTransferParams> {
    let k = params.k;
    let probs = params.presence_probs(dist)?;
    let p1 = probs.iter().find(|&&(d, _)| d == 1).map_or(0.0, |&(_, p)| p);
    let mut acc = vec![0.0f64; k + 1];
    let mut table = keep.then(Vec::new);

    for &(d, p) in probs.iter().filter(|&&(d, p)| d >= 2 && p > 0.0) {
        let u0 = k + 2 - d;
        let mut column = keep.then(|| vec![0.0f64; k + 1]);
        if p >= 1.0 {
            for (u, slot) in acc.iter_mut().enumerate().take(u0 + 1).skip(1) {
                *slot = f64::NEG_INFINITY;
                if let Some(c) = column.as_mut() {
                    c[u] = f64::NEG_INFINITY;
                }
            }
        } else {
            // ln f(u, d) = C(k−u, d−2)·ln(1 − p_d) < 0. The binomial factor
            // is tracked through its logarithm and updated incrementally:
            // going from u to u−1 multiplies it by (k−u+1)/(k−u−d+3).
            let ln_neg_lnp = (-(-p).ln_1p()).ln();
            let mut ln_coef = 0.0f64;
            for u in (1..=u0).rev() {
                if u < u0 {
                    ln_coef += ((k - u) as f64 / (k - u + 2 - d) as f64).ln();
                }
                let term = -(ln_coef + ln_neg_lnp).exp();
                acc[u] += term;
                if let Some(c) = column.as_mut() {
                    c[u] = term;
                }
            }
        }
        if let (Some(t), Some(c)) = (table.as_mut(), column) {
            t.push((d, c));
        }
    }

    let q = acc.iter().map(|&l| -l.exp_m1()).collect();
    Ok(QTransferParams { k, p1, q, ln_one_minus_q: acc, f_table: table })
}
