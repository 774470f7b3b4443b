//! Sampling code instances and encoding payloads.
//!
//! Under the Poisson model each `d`-subset of the `k` inputs is received
//! independently with probability `p_d = n·Ω_d / C(k, d)`. The number of
//! received degree-`d` symbols is therefore `Binomial(C(k, d), p_d)`, and the
//! received subsets are distinct.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Poisson};
use serde::{Deserialize, Serialize};

use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};
use crate::numeric::{choose_exact, ln_choose};
use crate::rng::stream_rng;

/// Above this many candidate subsets the per-degree count is drawn from
/// `Poisson(n·Ω_d)` instead of the exact binomial.
pub const EXACT_BINOMIAL_LIMIT: u128 = 1 << 20;
/// Slack allowed on `p_d ≤ 1` before it is reported as an error.
const PROB_SLACK: f64 = 1e-12;
/// Default payload word width in bytes.
pub const DEFAULT_WORD_BYTES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeParameters {
    pub k: usize,
    /// Mean number of received output symbols.
    pub n: f64,
    /// Overhead `δ` when the parameters were built from `n = (1+δ)k`.
    pub delta: Option<f64>,
}

impl CodeParameters {
    pub fn new(k: usize, n: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(n >= 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter(format!("n must be finite and nonnegative, got {n}")));
        }
        Ok(Self { k, n, delta: None })
    }

    pub fn with_overhead(k: usize, delta: f64) -> Result<Self> {
        if !(delta >= -1.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("overhead must be at least -1, got {delta}")));
        }
        let mut p = Self::new(k, (1.0 + delta) * k as f64)?;
        p.delta = Some(delta);
        Ok(p)
    }

    /// Overhead `n/k - 1`, whichever way the parameters were built.
    pub fn overhead(&self) -> f64 {
        self.delta.unwrap_or(self.n / self.k as f64 - 1.0)
    }

    /// `p_d` for every degree in the support, checking `p_d ≤ 1`.
    pub fn presence_probs(&self, dist: &DegreeDistribution) -> Result<Vec<(usize, f64)>> {
        dist.support()
            .iter()
            .map(|&(d, _)| presence_prob(d, self, dist).map(|p| (d, p)))
            .collect()
    }
}

/// `p_d = n·Ω_d / C(k, d)`.
///
/// Exact division when `C(k, d)` is representable, otherwise
/// `exp(ln n + ln Ω_d − ln C(k, d))`.
pub fn presence_prob(d: usize, params: &CodeParameters, dist: &DegreeDistribution) -> Result<f64> {
    if d < 1 || d > params.k {
        return Err(Error::DegreeOutOfRange { degree: d, k: params.k });
    }
    let omega = dist.weight(d);
    if omega == 0.0 || params.n == 0.0 {
        return Ok(0.0);
    }
    let p = match choose_exact(params.k as u64, d as u64) {
        Some(c) if c < (1u128 << 53) => params.n * omega / c as f64,
        _ => (params.n.ln() + omega.ln() - ln_choose(params.k as u64, d as u64)).exp(),
    };
    if p > 1.0 + PROB_SLACK {
        return Err(Error::ResultExceedsOne { degree: d, value: p });
    }
    Ok(p.min(1.0))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutputSymbol {
    /// Sorted, distinct input indices in `[0, k)`.
    pub neighbors: Vec<u32>,
    pub value: Option<Vec<u8>>,
}

impl OutputSymbol {
    pub fn new(mut neighbors: Vec<u32>) -> Self {
        neighbors.sort_unstable();
        neighbors.dedup();
        Self { neighbors, value: None }
    }

    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingModel {
    /// One Bernoulli trial per subset; subsets never repeat.
    Poisson,
    /// Exactly `round(n)` symbols with i.i.d. degrees; subsets may repeat.
    FixedCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeInstance {
    pub params: CodeParameters,
    pub model: SamplingModel,
    pub symbols: Vec<OutputSymbol>,
    /// `(d, N_d)` for every degree in the distribution's support.
    pub degree_counts: Vec<(usize, usize)>,
}

impl CodeInstance {
    /// Builds an instance from explicit neighbor sets (counts are derived).
    pub fn from_symbols(params: CodeParameters, symbols: Vec<OutputSymbol>) -> Result<Self> {
        let mut counts = std::collections::BTreeMap::new();
        for s in &symbols {
            if s.neighbors.is_empty() {
                return Err(Error::InvalidParameter("output symbol without neighbors".into()));
            }
            if let Some(&bad) = s.neighbors.iter().find(|&&i| i as usize >= params.k) {
                return Err(Error::DegreeOutOfRange { degree: bad as usize, k: params.k });
            }
            *counts.entry(s.degree()).or_insert(0usize) += 1;
        }
        Ok(Self {
            params,
            model: SamplingModel::Poisson,
            symbols,
            degree_counts: counts.into_iter().collect(),
        })
    }

    /// Total number of received symbols `N`.
    pub fn total(&self) -> usize {
        self.symbols.len()
    }

    pub fn has_values(&self) -> bool {
        self.symbols.iter().all(|s| s.value.is_some())
    }

    /// True when no neighbor set appears twice.
    pub fn subsets_distinct(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.symbols.len());
        self.symbols.iter().all(|s| seen.insert(&s.neighbors))
    }

    /// One JSON object per line: `{"neighbors":[…],"value":"hex"}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for s in &self.symbols {
            let line = SymbolLine {
                neighbors: s.neighbors.clone(),
                value: s.value.as_deref().map(to_hex),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(params: CodeParameters, input: R) -> Result<Self> {
        let mut symbols = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: SymbolLine = serde_json::from_str(&line)?;
            let mut sym = OutputSymbol::new(parsed.neighbors);
            sym.value = parsed.value.as_deref().map(from_hex).transpose()?;
            symbols.push(sym);
        }
        Self::from_symbols(params, symbols)
    }
}

#[derive(Serialize, Deserialize)]
struct SymbolLine {
    neighbors: Vec<u32>,
    value: Option<String>,
}

fn to_hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

fn from_hex(s: &str) -> Result<Vec<u8>> {
    if s.len() % 2 != 0 {
        return Err(Error::Parse(format!("odd-length hex string {s:?}")));
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

/// Samples an instance from the Poisson model.
///
/// Degree `d` uses its own ChaCha stream, so adding or removing degrees
/// leaves the other degrees' draws unchanged.
pub fn sample_instance(dist: &DegreeDistribution, params: &CodeParameters, seed: u64) -> Result<CodeInstance> {
    let probs = params.presence_probs(dist)?;
    let k = params.k;
    let mut symbols = Vec::new();
    let mut degree_counts = Vec::with_capacity(probs.len());
    for (&(d, omega), &(_, p)) in dist.support().iter().zip(&probs) {
        let mut rng = stream_rng(seed, d as u64);
        let exact = choose_exact(k as u64, d as u64).filter(|&c| c <= EXACT_BINOMIAL_LIMIT);
        let count = match exact {
            Some(c) => {
                let c = c as u64;
                let nd = Binomial::new(c, p)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?
                    .sample(&mut rng);
                for rank in index::sample(&mut rng, c as usize, nd as usize).into_iter() {
                    symbols.push(OutputSymbol { neighbors: unrank_colex(rank as u64, d, k), value: None });
                }
                nd as usize
            }
            None => {
                let mean = params.n * omega;
                let nd = if mean > 0.0 {
                    Poisson::new(mean)
                        .map_err(|e| Error::InvalidParameter(e.to_string()))?
                        .sample(&mut rng) as u64
                } else {
                    0
                };
                // C(k, d) > 2^20 here, so the clamp only matters for absurd means.
                let nd = match choose_exact(k as u64, d as u64) {
                    Some(c) => (nd as u128).min(c) as u64,
                    None => nd,
                } as usize;
                let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(nd);
                while seen.len() < nd {
                    let subset = random_subset(&mut rng, k, d);
                    if seen.insert(subset.clone()) {
                        symbols.push(OutputSymbol { neighbors: subset, value: None });
                    }
                }
                nd
            }
        };
        degree_counts.push((d, count));
    }
    Ok(CodeInstance { params: *params, model: SamplingModel::Poisson, symbols, degree_counts })
}

/// Classical LT reception: exactly `count` symbols, degrees drawn i.i.d. from
/// `Ω`, neighbors uniform. Repeated subsets are allowed.
pub fn sample_fixed_count(dist: &DegreeDistribution, k: usize, count: usize, seed: u64) -> Result<CodeInstance> {
    if dist.max_degree() > k {
        return Err(Error::DegreeOutOfRange { degree: dist.max_degree(), k });
    }
    let params = CodeParameters::new(k, count as f64)?;
    let degrees: Vec<usize> = dist.support().iter().map(|&(d, _)| d).collect();
    let picker = WeightedIndex::new(dist.support().iter().map(|&(_, p)| p))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = stream_rng(seed, 0);
    let mut counts = vec![0usize; degrees.len()];
    let mut symbols = Vec::with_capacity(count);
    for _ in 0..count {
        let i = picker.sample(&mut rng);
        counts[i] += 1;
        symbols.push(OutputSymbol { neighbors: random_subset(&mut rng, k, degrees[i]), value: None });
    }
    Ok(CodeInstance {
        params,
        model: SamplingModel::FixedCount,
        symbols,
        degree_counts: degrees.into_iter().zip(counts).collect(),
    })
}

fn random_subset<R: Rng + ?Sized>(rng: &mut R, k: usize, d: usize) -> Vec<u32> {
    let mut s: Vec<u32> = index::sample(rng, k, d).into_iter().map(|i| i as u32).collect();
    s.sort_unstable();
    s
}

/// The `rank`-th `d`-subset of `[0, k)` in colexicographic order.
fn unrank_colex(mut rank: u64, d: usize, k: usize) -> Vec<u32> {
    let mut out = vec![0u32; d];
    let mut c = k as u64;
    for i in (1..=d as u64).rev() {
        // Largest c with C(c, i) <= rank; c only decreases across i.
        c -= 1;
        while choose_exact(c, i).unwrap() > rank as u128 {
            c -= 1;
        }
        rank -= choose_exact(c, i).unwrap() as u64;
        out[i as usize - 1] = c as u32;
    }
    out
}

/// Fills each symbol's value with the XOR of its neighbors' input words.
pub fn encode_payload(instance: &CodeInstance, input_values: &[Vec<u8>]) -> Result<CodeInstance> {
    if input_values.len() != instance.params.k {
        return Err(Error::LengthMismatch { expected: instance.params.k, actual: input_values.len() });
    }
    let width = input_values.first().map_or(0, Vec::len);
    if input_values.iter().any(|v| v.len() != width) {
        return Err(Error::InvalidParameter("input words must share one width".into()));
    }
    let mut out = instance.clone();
    for sym in &mut out.symbols {
        let mut acc = vec![0u8; width];
        for &i in &sym.neighbors {
            xor_into(&mut acc, &input_values[i as usize]);
        }
        sym.value = Some(acc);
    }
    Ok(out)
}

pub(crate) fn xor_into(acc: &mut [u8], other: &[u8]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_point() -> DegreeDistribution {
        DegreeDistribution::validate(&[(1, 0.5), (2, 0.5)], 3).unwrap()
    }

    #[test]
    fn presence_prob_examples() {
        let dist = two_point();
        let params = CodeParameters::new(3, 3.0).unwrap();
        assert_relative_eq!(presence_prob(1, &params, &dist).unwrap(), 0.5);
        assert_relative_eq!(presence_prob(2, &params, &dist).unwrap(), 0.5);
        assert_eq!(presence_prob(3, &params, &dist).unwrap(), 0.0);

        let single = DegreeDistribution::validate(&[(1, 1.0)], 2).unwrap();
        let over = CodeParameters::new(2, 3.0).unwrap();
        assert!(matches!(presence_prob(1, &over, &single), Err(Error::ResultExceedsOne { degree: 1, .. })));
    }

    #[test]
    fn presence_prob_log_domain_for_huge_binomials() {
        let dist = DegreeDistribution::validate(&[(1, 0.5), (60, 0.5)], 1000).unwrap();
        let params = CodeParameters::new(1000, 1100.0).unwrap();
        let p = presence_prob(60, &params, &dist).unwrap();
        let expect = (1100f64 * 0.5).ln() - ln_choose(1000, 60);
        assert_relative_eq!(p.ln(), expect, max_relative = 1e-12);
    }

    #[test]
    fn overhead_constructor() {
        let p = CodeParameters::with_overhead(100, 0.1).unwrap();
        assert_relative_eq!(p.n, 110.0, max_relative = 1e-15);
        assert_eq!(p.delta, Some(0.1));
        assert!(CodeParameters::new(0, 1.0).is_err());
    }

    #[test]
    fn unrank_enumerates_every_subset_once() {
        let mut seen = HashSet::new();
        for r in 0..choose_exact(7, 3).unwrap() as u64 {
            let s = unrank_colex(r, 3, 7);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&i| i < 7));
            assert!(seen.insert(s));
        }
        assert_eq!(seen.len(), 35);
    }

    #[test]
    fn vanishing_rate_gives_empty_instances() {
        let dist = DegreeDistribution::validate(&[(1, 1.0)], 5).unwrap();
        let params = CodeParameters::new(5, 0.0001).unwrap();
        let nonempty = (0..200).filter(|&s| sample_instance(&dist, &params, s).unwrap().total() > 0).count();
        assert!(nonempty <= 2);
    }

    #[test]
    fn sampling_is_deterministic_and_distinct() {
        let dist = DegreeDistribution::soliton_robust(50, 0.1, 0.5).unwrap();
        let params = CodeParameters::new(50, 60.0).unwrap();
        let a = sample_instance(&dist, &params, 42).unwrap();
        let b = sample_instance(&dist, &params, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.subsets_distinct());
        assert_eq!(a.total(), a.degree_counts.iter().map(|&(_, c)| c).sum::<usize>());
        for s in &a.symbols {
            assert!(s.neighbors.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn full_coverage_when_probability_is_one() {
        let dist = DegreeDistribution::validate(&[(1, 1.0)], 4).unwrap();
        let params = CodeParameters::new(4, 4.0).unwrap();
        let inst = sample_instance(&dist, &params, 3).unwrap();
        assert_eq!(inst.total(), 4);
    }

    #[test]
    fn mean_counts_match_the_model() {
        // E[N_1] = E[N_2] = 1.5; Var = C·p·(1-p) = 0.75 each.
        let dist = two_point();
        let params = CodeParameters::new(3, 3.0).unwrap();
        let trials = 100_000u64;
        let (mut s1, mut s2) = (0usize, 0usize);
        for seed in 0..trials {
            let inst = sample_instance(&dist, &params, seed).unwrap();
            s1 += inst.degree_counts[0].1;
            s2 += inst.degree_counts[1].1;
        }
        let sigma = (0.75 / trials as f64).sqrt();
        assert!((s1 as f64 / trials as f64 - 1.5).abs() < 3.0 * sigma);
        assert!((s2 as f64 / trials as f64 - 1.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn fixed_count_has_exact_size() {
        let dist = DegreeDistribution::soliton_ideal(20).unwrap();
        let inst = sample_fixed_count(&dist, 20, 25, 9).unwrap();
        assert_eq!(inst.total(), 25);
        assert_eq!(inst.model, SamplingModel::FixedCount);
        assert_eq!(inst, sample_fixed_count(&dist, 20, 25, 9).unwrap());
    }

    #[test]
    fn payload_encoding_examples() {
        let params = CodeParameters::new(2, 2.0).unwrap();
        let inst = CodeInstance::from_symbols(
            params,
            vec![OutputSymbol::new(vec![0]), OutputSymbol::new(vec![0, 1]), OutputSymbol::new(vec![1, 0])],
        )
        .unwrap();
        let enc = encode_payload(&inst, &[vec![0x0F], vec![0xF0]]).unwrap();
        assert_eq!(enc.symbols[0].value, Some(vec![0x0F]));
        assert_eq!(enc.symbols[1].value, Some(vec![0xFF]));
        assert_eq!(enc.symbols[1].value, enc.symbols[2].value);
        assert!(matches!(
            encode_payload(&inst, &[vec![0]]),
            Err(Error::LengthMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn jsonl_dump_round_trips() {
        let dist = DegreeDistribution::soliton_ideal(8).unwrap();
        let params = CodeParameters::new(8, 10.0).unwrap();
        let inst = sample_instance(&dist, &params, 1).unwrap();
        let words: Vec<Vec<u8>> = (0..8u8).map(|i| vec![i, 0xA0 | i]).collect();
        let enc = encode_payload(&inst, &words).unwrap();
        let mut buf = Vec::new();
        enc.write_jsonl(&mut buf).unwrap();
        let first = String::from_utf8(buf.clone()).unwrap();
        assert!(first.lines().all(|l| l.starts_with("{\"neighbors\":[") && l.contains("\"value\":\"")));
        let back = CodeInstance::read_jsonl(params, &buf[..]).unwrap();
        assert_eq!(back.symbols, enc.symbols);
    }
}
