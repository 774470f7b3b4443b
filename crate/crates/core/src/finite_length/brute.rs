use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};
use crate::peeling::peel;
use crate::sampler::{presence_prob, CodeInstance, CodeParameters, OutputSymbol};

pub const BRUTE_FORCE_MAX_K: usize = 4;

/// Failure probability by enumerating every presence pattern of the
/// candidate subsets and peeling each one.
pub fn brute_force_exact(dist: &DegreeDistribution, params: &CodeParameters) -> Result<f64> {
    let k = params.k;
    if k > BRUTE_FORCE_MAX_K {
        return Err(Error::KTooLarge { k, limit: BRUTE_FORCE_MAX_K });
    }
    let mut candidates: Vec<(Vec<u32>, f64)> = Vec::new();
    for mask in 1u32..(1 << k) {
        let d = mask.count_ones() as usize;
        let p = presence_prob(d, params, dist)?;
        if p > 0.0 {
            let members = (0..k as u32).filter(|i| mask >> i & 1 == 1).collect();
            candidates.push((members, p));
        }
    }

    let mut failure = 0.0;
    for pattern in 0u64..(1 << candidates.len()) {
        let mut prob = 1.0;
        let mut symbols = Vec::new();
        for (j, (members, p)) in candidates.iter().enumerate() {
            if pattern >> j & 1 == 1 {
                prob *= p;
                symbols.push(OutputSymbol::new(members.clone()));
            } else {
                prob *= 1.0 - p;
            }
        }
        if prob == 0.0 {
            continue;
        }
        let instance = CodeInstance::from_symbols(*params, symbols)?;
        if !peel(&instance).success {
            failure += prob;
        }
    }
    Ok(failure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let d1 = DegreeDistribution::validate(&[(1, 1.0)], 2).unwrap();
        assert_eq!(brute_force_exact(&d1, &CodeParameters::new(2, 2.0).unwrap()).unwrap(), 0.0);
        assert!((brute_force_exact(&d1, &CodeParameters::new(2, 1.0).unwrap()).unwrap() - 0.75).abs() < 1e-15);
        let d = DegreeDistribution::validate(&[(1, 0.5), (2, 0.5)], 3).unwrap();
        assert!((brute_force_exact(&d, &CodeParameters::new(3, 3.0).unwrap()).unwrap() - 0.40625).abs() < 1e-15);
    }

    #[test]
    fn independently_computed_values() {
        let ideal4 = DegreeDistribution::soliton_ideal(4).unwrap();
        let v = brute_force_exact(&ideal4, &CodeParameters::new(4, 4.0).unwrap()).unwrap();
        assert!((v - 0.6085873199588477).abs() < 1e-13);
        let d = DegreeDistribution::validate(&[(1, 0.5), (2, 0.5)], 4).unwrap();
        let v = brute_force_exact(&d, &CodeParameters::new(4, 2.0).unwrap()).unwrap();
        assert!((v - 0.9199761284722222).abs() < 1e-13);
        let third = 1.0 / 3.0;
        let d = DegreeDistribution::validate(&[(1, third), (2, third), (3, third)], 3).unwrap();
        let v = brute_force_exact(&d, &CodeParameters::new(3, 1.5).unwrap()).unwrap();
        assert!((v - 6875.0 / 7776.0).abs() < 1e-13);
        let v = brute_force_exact(&d, &CodeParameters::new(3, 3.0).unwrap()).unwrap();
        assert!((v - 40.0 / 81.0).abs() < 1e-13);
        let d = DegreeDistribution::validate(&[(1, 0.25), (2, 0.5), (3, 0.25)], 4).unwrap();
        let v = brute_force_exact(&d, &CodeParameters::new(4, 6.0).unwrap()).unwrap();
        assert!((v - 2187125.0 / 8388608.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_large_k() {
        let d = DegreeDistribution::soliton_ideal(5).unwrap();
        assert_eq!(
            brute_force_exact(&d, &CodeParameters::new(5, 5.0).unwrap()),
            Err(Error::KTooLarge { k: 5, limit: 4 })
        );
    }
}
