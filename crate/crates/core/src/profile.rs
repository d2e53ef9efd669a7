//! Performance profiling: run all eight heuristics on an instance, normalize
//! the resulting cost vector, and derive the binary performance signature
//! marking the top performers.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::engine::{pack, HeuristicId, HEURISTIC_COUNT};
use crate::instance::PackingInstance;

/// Default top-performer tolerance on the normalized cost vector.
pub const DEFAULT_DELTA: f64 = 0.01;

/// Binary performance signature: bit `i` marks heuristic `i` as a top
/// performer. Stored as 0/1 bytes to match the on-disk record format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature(pub [u8; HEURISTIC_COUNT]);

impl Signature {
    pub fn is_set(&self, i: usize) -> bool {
        self.0[i] != 0
    }

    /// Index of the first set bit, if any.
    pub fn first_set(&self) -> Option<usize> {
        self.0.iter().position(|&b| b != 0)
    }

    pub fn set_count(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    /// Indices of all set bits.
    pub fn set_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(i, _)| i)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

/// Profiling outcome for one instance: raw costs, their normalization, the
/// derived signature, and (once assigned) the label.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRecord {
    pub id: String,
    /// Raw cost per heuristic, indexed by `HeuristicId`.
    pub rp: [f64; HEURISTIC_COUNT],
    /// `rp` scaled to unit Euclidean norm (zero vector stays zero).
    pub np: [f64; HEURISTIC_COUNT],
    pub signature: Signature,
    /// Tolerance used to derive `signature`.
    pub delta: f64,
    pub label: Option<u8>,
}

impl ProfileRecord {
    /// Builds the full record for an instance at tolerance `delta`.
    pub fn compute(inst: &PackingInstance, delta: f64) -> Self {
        let rp = profile(inst);
        let np = normalize(&rp);
        let signature = signature(&np, delta);
        ProfileRecord {
            id: inst.id.clone(),
            rp,
            np,
            signature,
            delta,
            label: None,
        }
    }

    /// Rebuilds a record from its on-disk fields (costs + signature).
    pub fn from_parts(id: String, rp: [f64; HEURISTIC_COUNT], delta: f64) -> Self {
        let np = normalize(&rp);
        let signature = signature(&np, delta);
        ProfileRecord {
            id,
            rp,
            np,
            signature,
            delta,
            label: None,
        }
    }
}

/// Runs all eight heuristics on the instance and returns the raw cost vector.
pub fn profile(inst: &PackingInstance) -> [f64; HEURISTIC_COUNT] {
    let mut rp = [0.0; HEURISTIC_COUNT];
    for h in HeuristicId::ALL {
        rp[h.id() as usize] = pack(inst, h).cost;
    }
    rp
}

/// Scales a raw cost vector to unit Euclidean norm.
///
/// The zero vector (all heuristics packed perfectly) maps to the zero vector.
pub fn normalize(rp: &[f64; HEURISTIC_COUNT]) -> [f64; HEURISTIC_COUNT] {
    let norm = rp.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return [0.0; HEURISTIC_COUNT];
    }
    let mut np = *rp;
    for x in &mut np {
        *x /= norm;
    }
    np
}

/// Marks every heuristic whose normalized cost is within `delta` of the
/// minimum. At least the argmin bit is always set.
pub fn signature(np: &[f64; HEURISTIC_COUNT], delta: f64) -> Signature {
    let min = np.iter().copied().fold(f64::INFINITY, f64::min);
    let mut bits = [0u8; HEURISTIC_COUNT];
    for (b, &x) in bits.iter_mut().zip(np.iter()) {
        if x <= min + delta {
            *b = 1;
        }
    }
    Signature(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_item_profiles_identically_everywhere() {
        let inst = PackingInstance::new("t", vec![5.0], vec![10.0]);
        let rp = profile(&inst);
        assert_eq!(rp, [0.5; 8]);
    }

    #[test]
    fn worked_instance_has_zero_cost_at_first_best_fit() {
        let inst = PackingInstance::new("t", vec![6.0, 4.0, 3.0, 2.0], vec![10.0, 5.0]);
        let rp = profile(&inst);
        assert!(rp[2].abs() < 1e-12);
    }

    #[test]
    fn single_bin_type_pairs_costs() {
        let inst = PackingInstance::new("t", vec![4.0, 7.0, 2.0, 6.0, 3.0], vec![9.0]);
        let rp = profile(&inst);
        for pair in [(0, 1), (2, 3), (4, 5), (6, 7)] {
            assert_eq!(rp[pair.0], rp[pair.1]);
        }
    }

    #[test]
    fn normalize_three_four_vector() {
        let rp = [3.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let np = normalize(&rp);
        assert!((np[0] - 0.6).abs() < 1e-12);
        assert!((np[1] - 0.8).abs() < 1e-12);
        assert!(np[2..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn normalize_zero_vector_stays_zero() {
        assert_eq!(normalize(&[0.0; 8]), [0.0; 8]);
    }

    #[test]
    fn normalize_uniform_vector() {
        let np = normalize(&[1.0; 8]);
        let expected = 1.0 / 8f64.sqrt();
        for x in np {
            assert!((x - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn signature_marks_values_near_minimum() {
        let np = [0.6, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(signature(&np, 0.01).0, [0, 0, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn signature_of_uniform_vector_is_all_ones() {
        let np = normalize(&[1.0; 8]);
        assert_eq!(signature(&np, 0.0).0, [1; 8]);
    }

    #[test]
    fn zero_delta_unique_minimum_is_one_hot() {
        let np = [0.5, 0.4, 0.6, 0.1, 0.3, 0.2, 0.7, 0.35];
        let s = signature(&np, 0.0);
        assert_eq!(s.0, [0, 0, 0, 1, 0, 0, 0, 0]);
        assert_eq!(s.first_set(), Some(3));
    }

    #[test]
    fn zero_rp_gives_all_ones_signature() {
        let np = normalize(&[0.0; 8]);
        let s = signature(&np, 0.01);
        assert_eq!(s.0, [1; 8]);
    }

    #[test]
    fn signature_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let mut rp = [0.0; 8];
            for x in &mut rp {
                *x = rng.gen_range(0.0..5.0);
            }
            let scaled: [f64; 8] = std::array::from_fn(|i| rp[i] * 37.5);
            assert_eq!(
                signature(&normalize(&rp), 0.01),
                signature(&normalize(&scaled), 0.01)
            );
        }
    }

    #[test]
    fn signature_matches_bruteforce_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let mut rp = [0.0; 8];
            for x in &mut rp {
                *x = if rng.gen_bool(0.1) {
                    0.0
                } else {
                    rng.gen_range(0.0..3.0)
                };
            }
            let np = normalize(&rp);
            let delta = rng.gen_range(0.0..0.1);
            let s = signature(&np, delta);
            let min = np.iter().copied().fold(f64::INFINITY, f64::min);
            for i in 0..8 {
                assert_eq!(s.is_set(i), np[i] <= min + delta);
            }
            assert!(s.set_count() >= 1);
        }
    }

    #[test]
    fn larger_delta_only_adds_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let mut rp = [0.0; 8];
            for x in &mut rp {
                *x = rng.gen_range(0.0..2.0);
            }
            let np = normalize(&rp);
            let mut prev = signature(&np, 0.0);
            for delta in [0.005, 0.01, 0.05] {
                let next = signature(&np, delta);
                for i in 0..8 {
                    assert!(!prev.is_set(i) || next.is_set(i));
                }
                prev = next;
            }
        }
    }
}
