//! Belief-propagation (peeling) decoder.
//!
//! The ripple is the set of undecoded input symbols that some output symbol
//! covers alone. Each step decodes one ripple symbol and removes it from its
//! output symbols; any output symbol left with a single undecoded neighbor
//! adds that neighbor to the ripple. The decoded set does not depend on the
//! processing order; the recorded ripple trajectory uses a FIFO queue where
//! symbols joining in the same step enter in ascending index order.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use crate::error::{Error, Result};
use crate::sampler::{xor_into, CodeInstance};

/// Ripple scheduling policy. Only the trajectory depends on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RippleOrder {
    #[default]
    Fifo,
    Lifo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub k: usize,
    /// `decoded[i]` is true when input `i` was recovered.
    pub decoded: Vec<bool>,
    /// `(input, output symbol it was read from)` in decoding order.
    pub decode_order: Vec<(u32, usize)>,
    /// `(u, X_u)` from `u = k` down to the first empty ripple or `u = 1`.
    pub ripple_trajectory: Vec<(usize, usize)>,
    pub success: bool,
    pub decoded_fraction: f64,
    /// Recovered words, indexed by input, when the instance carries values.
    pub recovered_values: Option<Vec<Option<Vec<u8>>>>,
    /// Number of edge removals performed.
    pub edge_operations: u64,
}

impl DecodeResult {
    pub fn decoded_count(&self) -> usize {
        self.decode_order.len()
    }

    pub fn decoded_indices(&self) -> Vec<usize> {
        (0..self.k).filter(|&i| self.decoded[i]).collect()
    }

    /// CSV with header `u,X_u`.
    pub fn write_trajectory_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "u,X_u")?;
        for &(u, x) in &self.ripple_trajectory {
            writeln!(out, "{u},{x}")?;
        }
        Ok(())
    }
}

pub fn peel(instance: &CodeInstance) -> DecodeResult {
    peel_with_order(instance, RippleOrder::Fifo)
}

pub fn peel_with_order(instance: &CodeInstance, order: RippleOrder) -> DecodeResult {
    let k = instance.params.k;
    let symbols = &instance.symbols;

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut remaining: Vec<u32> = Vec::with_capacity(symbols.len());
    // XOR of the indices of a symbol's undecoded neighbors; once a single
    // neighbor is left this is its index.
    let mut index_xor: Vec<u32> = Vec::with_capacity(symbols.len());
    for (o, s) in symbols.iter().enumerate() {
        for &i in &s.neighbors {
            incident[i as usize].push(o);
        }
        remaining.push(s.neighbors.len() as u32);
        index_xor.push(s.neighbors.iter().fold(0, |a, &i| a ^ i));
    }

    let mut decoded = vec![false; k];
    let mut in_ripple = vec![false; k];
    let mut source = vec![usize::MAX; k];
    let mut ripple: VecDeque<u32> = VecDeque::new();

    let mut initial: Vec<u32> = Vec::new();
    for (o, s) in symbols.iter().enumerate() {
        if s.neighbors.len() == 1 {
            let i = s.neighbors[0];
            if !in_ripple[i as usize] {
                in_ripple[i as usize] = true;
                source[i as usize] = o;
                initial.push(i);
            }
        }
    }
    initial.sort_unstable();
    ripple.extend(initial);

    let mut undecoded = k;
    let mut trajectory = Vec::with_capacity(k);
    let mut decode_order = Vec::with_capacity(k);
    let mut edge_ops = 0u64;
    if k > 0 {
        trajectory.push((k, ripple.len()));
    }
    let mut joined: Vec<(u32, usize)> = Vec::new();
    loop {
        let next = match order {
            RippleOrder::Fifo => ripple.pop_front(),
            RippleOrder::Lifo => ripple.pop_back(),
        };
        let Some(a) = next else { break };
        let a_idx = a as usize;
        decoded[a_idx] = true;
        in_ripple[a_idx] = false;
        decode_order.push((a, source[a_idx]));
        undecoded -= 1;

        joined.clear();
        for &o in &incident[a_idx] {
            if remaining[o] == 0 {
                continue;
            }
            remaining[o] -= 1;
            index_xor[o] ^= a;
            edge_ops += 1;
            if remaining[o] == 1 {
                let b = index_xor[o];
                if !in_ripple[b as usize] {
                    in_ripple[b as usize] = true;
                    source[b as usize] = o;
                    joined.push((b, o));
                }
            }
        }
        joined.sort_unstable();
        ripple.extend(joined.iter().map(|&(b, _)| b));

        if undecoded == 0 {
            break;
        }
        trajectory.push((undecoded, ripple.len()));
    }

    let count = decode_order.len();
    let recovered_values = instance.has_values().then(|| replay_values(instance, k, &decode_order));
    DecodeResult {
        k,
        decoded,
        decode_order,
        ripple_trajectory: trajectory,
        success: count == k,
        decoded_fraction: if k == 0 { 1.0 } else { count as f64 / k as f64 },
        recovered_values,
        edge_operations: edge_ops,
    }
}

fn replay_values(instance: &CodeInstance, k: usize, order: &[(u32, usize)]) -> Vec<Option<Vec<u8>>> {
    let mut values: Vec<Option<Vec<u8>>> = vec![None; k];
    for &(a, o) in order {
        let sym = &instance.symbols[o];
        let mut acc = sym.value.clone().unwrap_or_default();
        for &b in &sym.neighbors {
            if b != a {
                // Every other neighbor was decoded before `a`.
                xor_into(&mut acc, values[b as usize].as_deref().unwrap_or(&[]));
            }
        }
        values[a as usize] = Some(acc);
    }
    values
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recovery {
    Complete(Vec<Vec<u8>>),
    /// Words for the decoded inputs only, keyed by input index.
    Partial(BTreeMap<usize, Vec<u8>>),
}

pub fn recover_values(result: &DecodeResult, instance: &CodeInstance) -> Result<Recovery> {
    if !instance.has_values() {
        return Err(Error::MissingValues);
    }
    let values = match &result.recovered_values {
        Some(v) => v.clone(),
        None => replay_values(instance, result.k, &result.decode_order),
    };
    if result.success {
        Ok(Recovery::Complete(values.into_iter().map(Option::unwrap_or_default).collect()))
    } else {
        Ok(Recovery::Partial(
            values.into_iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).collect(),
        ))
    }
}

/// True when some output symbol still has exactly one undecoded neighbor.
pub fn residual_has_degree_one(instance: &CodeInstance, decoded: &[bool]) -> bool {
    instance
        .symbols
        .iter()
        .any(|s| s.neighbors.iter().filter(|&&i| !decoded[i as usize]).count() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_dist::DegreeDistribution;
    use crate::sampler::{encode_payload, sample_instance, CodeParameters, OutputSymbol};

    fn instance(k: usize, sets: &[&[u32]]) -> CodeInstance {
        let params = CodeParameters::new(k, sets.len() as f64).unwrap();
        CodeInstance::from_symbols(params, sets.iter().map(|s| OutputSymbol::new(s.to_vec())).collect()).unwrap()
    }

    #[test]
    fn chain_peels_completely() {
        let r = peel(&instance(3, &[&[0], &[0, 1], &[1, 2]]));
        assert!(r.success);
        assert_eq!(r.decoded_indices(), vec![0, 1, 2]);
        assert_eq!(r.ripple_trajectory, vec![(3, 1), (2, 1), (1, 1)]);
        assert_eq!(r.decoded_fraction, 1.0);
    }

    #[test]
    fn no_degree_one_means_no_progress() {
        let r = peel(&instance(2, &[&[0, 1]]));
        assert!(!r.success);
        assert!(r.decoded_indices().is_empty());
        assert_eq!(r.ripple_trajectory, vec![(2, 0)]);
    }

    #[test]
    fn all_degree_one() {
        let r = peel(&instance(3, &[&[0], &[1], &[2]]));
        assert!(r.success);
        assert_eq!(r.ripple_trajectory, vec![(3, 3), (2, 2), (1, 1)]);
    }

    #[test]
    fn empty_instance() {
        let r = peel(&instance(4, &[]));
        assert_eq!(r.decoded_count(), 0);
        assert_eq!(r.ripple_trajectory, vec![(4, 0)]);
        let rec = recover_values(&r, &instance(4, &[])).unwrap();
        assert_eq!(rec, Recovery::Partial(BTreeMap::new()));
    }

    #[test]
    fn stalls_midway_and_records_zero() {
        let r = peel(&instance(4, &[&[0], &[0, 1], &[2, 3]]));
        assert_eq!(r.decoded_indices(), vec![0, 1]);
        assert_eq!(r.ripple_trajectory, vec![(4, 1), (3, 1), (2, 0)]);
        assert!(!residual_has_degree_one(&instance(4, &[&[0], &[0, 1], &[2, 3]]), &r.decoded));
    }

    #[test]
    fn payload_round_trip() {
        let dist = DegreeDistribution::soliton_robust(40, 0.1, 0.5).unwrap();
        let params = CodeParameters::new(40, 80.0).unwrap();
        let words: Vec<Vec<u8>> = (0..40u64).map(|i| (i * 0x0101_0101_0101).to_le_bytes().to_vec()).collect();
        let mut saw_success = false;
        let mut saw_failure = false;
        for seed in 0..200 {
            let inst = encode_payload(&sample_instance(&dist, &params, seed).unwrap(), &words).unwrap();
            let r = peel(&inst);
            match recover_values(&r, &inst).unwrap() {
                Recovery::Complete(v) => {
                    saw_success = true;
                    assert_eq!(v, words);
                }
                Recovery::Partial(m) => {
                    saw_failure = true;
                    assert_eq!(m.keys().copied().collect::<Vec<_>>(), r.decoded_indices());
                    for (i, w) in m {
                        assert_eq!(w, words[i]);
                    }
                }
            }
        }
        assert!(saw_success && saw_failure);
    }

    #[test]
    fn recover_requires_values() {
        let inst = instance(2, &[&[0]]);
        let r = peel(&inst);
        assert_eq!(recover_values(&r, &inst), Err(Error::MissingValues));
    }

    #[test]
    fn order_invariance_and_residual_on_random_instances() {
        let dist = DegreeDistribution::soliton_ideal(60).unwrap();
        let params = CodeParameters::new(60, 66.0).unwrap();
        for seed in 0..100 {
            let inst = sample_instance(&dist, &params, seed).unwrap();
            let fifo = peel(&inst);
            let lifo = peel_with_order(&inst, RippleOrder::Lifo);
            assert_eq!(fifo.decoded, lifo.decoded);
            assert!(!residual_has_degree_one(&inst, &fifo.decoded));
            let edges: usize = inst.symbols.iter().map(|s| s.degree()).sum();
            assert!(fifo.edge_operations as usize <= edges);
            // Trajectory steps: one leaves, zero or more join.
            for w in fifo.ripple_trajectory.windows(2) {
                assert_eq!(w[1].0 + 1, w[0].0);
                assert!(w[1].1 + 1 >= w[0].1);
            }
        }
    }

    #[test]
    fn trajectory_csv() {
        let r = peel(&instance(3, &[&[0], &[0, 1], &[1, 2]]));
        let mut buf = Vec::new();
        r.write_trajectory_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "u,X_u\n3,1\n2,1\n1,1\n");
    }
}
