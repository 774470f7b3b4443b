//! Degree distributions `Ω = (Ω_1, …, Ω_D)` over output-symbol degrees.
//!
//! Distributions are stored sparsely: only degrees with positive weight are
//! kept, sorted ascending. Weights below [`DROP_BELOW`] after normalization
//! are removed from the support.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Allowed deviation of `Σ Ω_d` from one.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Weights below this are dropped from the support.
pub const DROP_BELOW: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    k: usize,
    /// `(d, Ω_d)` sorted by degree, all weights positive.
    weights: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    /// Validates raw `(degree, probability)` pairs against `k`.
    ///
    /// Pairs may come in any order; zero weights are accepted and dropped.
    /// A sum within [`SUM_TOLERANCE`] of one is kept as given.
    pub fn validate(raw: &[(usize, f64)], k: usize) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        let mut weights = Vec::with_capacity(raw.len());
        for &(d, p) in raw {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::NegativeWeight { degree: d, weight: p });
            }
            if d < 1 || d > k {
                return Err(Error::DegreeOutOfRange { degree: d, k });
            }
            weights.push((d, p));
        }
        weights.sort_by_key(|&(d, _)| d);
        if let Some(w) = weights.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateDegree(w[0].0));
        }
        let sum: f64 = weights.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::SumNotOne { sum });
        }
        weights.retain(|&(_, p)| p >= DROP_BELOW);
        if weights.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        Ok(Self { k, weights })
    }

    /// Normalizes nonnegative weights and drops negligible entries.
    fn from_unnormalized(k: usize, raw: Vec<(usize, f64)>) -> Result<Self> {
        let total: f64 = raw.iter().map(|&(_, w)| w).sum();
        let normalized: Vec<(usize, f64)> = raw
            .into_iter()
            .map(|(d, w)| (d, w / total))
            .filter(|&(_, p)| p >= DROP_BELOW)
            .collect();
        let sum: f64 = normalized.iter().map(|&(_, p)| p).sum();
        // A second pass absorbs the mass of dropped entries.
        let normalized = normalized.into_iter().map(|(d, p)| (d, p / sum)).collect::<Vec<_>>();
        Self::validate(&normalized, k)
    }

    /// Ideal soliton: `Ω_1 = 1/k`, `Ω_d = 1/(d(d-1))` for `2 ≤ d ≤ k`.
    pub fn soliton_ideal(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("ideal soliton needs k >= 2, got {k}")));
        }
        let raw = ideal_weights(k);
        Self::from_unnormalized(k, raw)
    }

    /// Robust soliton with `R = c·ln(k/δ)·√k`.
    ///
    /// The spike sits at `m = round(k/R)` clamped to `[2, k]`; `τ(d) = R/(dk)`
    /// for `d < m` and `τ(m) = R·ln(R/δ)/k`.
    pub fn soliton_robust(k: usize, c: f64, delta_rs: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("robust soliton needs k >= 2, got {k}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        if !(delta_rs > 0.0 && delta_rs < 1.0) {
            return Err(Error::InvalidParameter(format!("delta_rs must lie in (0, 1), got {delta_rs}")));
        }
        let kf = k as f64;
        let r = c * (kf / delta_rs).ln() * kf.sqrt();
        let spike = ((kf / r).round() as usize).clamp(2, k);
        let spike_weight = r * (r / delta_rs).ln() / kf;
        if spike_weight < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "R = {r} is below delta_rs = {delta_rs}; the spike weight would be negative"
            )));
        }
        let mut raw = ideal_weights(k);
        for (d, w) in raw.iter_mut() {
            if *d < spike {
                *w += r / (*d as f64 * kf);
            } else if *d == spike {
                *w += spike_weight;
            }
        }
        Self::from_unnormalized(k, raw)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Largest degree with positive weight.
    pub fn max_degree(&self) -> usize {
        self.weights.last().map(|&(d, _)| d).unwrap_or(0)
    }

    /// Support as `(d, Ω_d)` pairs sorted by degree.
    pub fn support(&self) -> &[(usize, f64)] {
        &self.weights
    }

    pub fn weight(&self, d: usize) -> f64 {
        self.weights
            .binary_search_by_key(&d, |&(deg, _)| deg)
            .map(|i| self.weights[i].1)
            .unwrap_or(0.0)
    }

    /// Average degree `Σ d·Ω_d`.
    pub fn mean_degree(&self) -> f64 {
        self.weights.iter().map(|&(d, p)| d as f64 * p).sum()
    }

    /// Same weights re-bound to another `k` (must cover the max degree).
    pub fn with_k(&self, k: usize) -> Result<Self> {
        if self.max_degree() > k {
            return Err(Error::DegreeOutOfRange { degree: self.max_degree(), k });
        }
        Ok(Self { k, weights: self.weights.clone() })
    }

    /// JSON text with degrees ascending and 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        write!(s, "{{\"k\": {}, \"weights\": [", self.k).unwrap();
        for (i, &(d, p)) in self.weights.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            write!(s, "{{\"d\": {d}, \"p\": {p:.16e}}}").unwrap();
        }
        s.push_str("]}");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DistFile = serde_json::from_str(text)?;
        let raw: Vec<(usize, f64)> = file.weights.iter().map(|w| (w.d, w.p)).collect();
        Self::validate(&raw, file.k)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

fn ideal_weights(k: usize) -> Vec<(usize, f64)> {
    let mut raw = Vec::with_capacity(k);
    raw.push((1, 1.0 / k as f64));
    for d in 2..=k {
        let d_f = d as f64;
        raw.push((d, 1.0 / (d_f * (d_f - 1.0))));
    }
    raw
}

#[derive(Debug, Serialize, Deserialize)]
struct DistFile {
    k: usize,
    weights: Vec<DistEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DistEntry {
    d: usize,
    p: f64,
}
