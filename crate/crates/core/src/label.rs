//! Signature labeling: fast prefix labels, weighted cluster entropy, greedy
//! Monte Carlo refinement of label assignments, and minority-class filtering.
//!
//! A label is always one of the signature's set bits, so every labeled
//! instance keeps a top-performing heuristic as its class.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

use crate::profile::Signature;

const CLUSTERS: usize = 8;

/// Labeling failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelError {
    AllZeroSignature,
    /// Minority filtering removed every class.
    NoClassesRetained,
}

impl fmt::Display for LabelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelError::AllZeroSignature => write!(f, "signature has no set bits"),
            LabelError::NoClassesRetained => write!(f, "no classes survive the share filter"),
        }
    }
}

impl std::error::Error for LabelError {}

/// Index of the first set bit: the cheap initial cluster/label.
pub fn prefix_label(signature: &Signature) -> Result<u8, LabelError> {
    signature
        .first_set()
        .map(|i| i as u8)
        .ok_or(LabelError::AllZeroSignature)
}

/// A complete label assignment over a signature corpus, with the per-cluster
/// bit counts the entropy objective is computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAssignment {
    /// Label per record, parallel to the signature corpus.
    pub labels: Vec<u8>,
    /// `counts[c][j]` = set bits at position `j` among records in cluster `c`.
    pub counts: [[u64; CLUSTERS]; CLUSTERS],
    /// Records per cluster.
    pub sizes: [u64; CLUSTERS],
}

impl LabelAssignment {
    /// Builds the prefix-label assignment for a signature corpus.
    pub fn from_prefix(signatures: &[Signature]) -> Result<Self, LabelError> {
        let labels = signatures
            .iter()
            .map(prefix_label)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_labels(signatures, labels))
    }

    /// Builds an assignment from explicit labels, recounting bits.
    pub fn from_labels(signatures: &[Signature], labels: Vec<u8>) -> Self {
        debug_assert_eq!(signatures.len(), labels.len());
        let mut counts = [[0u64; CLUSTERS]; CLUSTERS];
        let mut sizes = [0u64; CLUSTERS];
        for (sig, &label) in signatures.iter().zip(&labels) {
            let c = label as usize;
            sizes[c] += 1;
            for j in sig.set_bits() {
                counts[c][j] += 1;
            }
        }
        LabelAssignment {
            labels,
            counts,
            sizes,
        }
    }

    pub fn total(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// True iff every label's bit is set in its signature and the cached
    /// counts match a recount from the raw signatures.
    pub fn is_consistent(&self, signatures: &[Signature]) -> bool {
        if signatures.len() != self.labels.len() {
            return false;
        }
        let valid = self
            .labels
            .iter()
            .zip(signatures)
            .all(|(&l, s)| s.is_set(l as usize));
        let recount = Self::from_labels(signatures, self.labels.clone());
        valid && recount.counts == self.counts && recount.sizes == self.sizes
    }
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Size-weighted mean-per-bit entropy of one cluster: `n_c * (1/8) * sum_j
/// h(p_cj)`. Empty clusters contribute 0.
fn weighted_cluster_entropy(counts: &[u64; CLUSTERS], size: u64) -> f64 {
    if size == 0 {
        return 0.0;
    }
    let n = size as f64;
    let mut sum = 0.0;
    for &k in counts {
        sum += binary_entropy(k as f64 / n);
    }
    n * sum / CLUSTERS as f64
}

/// Weighted average binary entropy of the assignment, in bits:
/// `E = (1/N) * sum_c n_c * H_c` with `H_c` the mean per-bit binary entropy
/// of cluster `c`'s signatures.
pub fn cluster_entropy(assignment: &LabelAssignment) -> f64 {
    let total = assignment.total();
    if total == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for c in 0..CLUSTERS {
        sum += weighted_cluster_entropy(&assignment.counts[c], assignment.sizes[c]);
    }
    sum / total as f64
}

/// Entropy value after each refinement iteration; entry 0 is the initial
/// entropy. Non-increasing by construction of the greedy acceptance rule.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTrace {
    pub entries: Vec<(u64, f64)>,
}

impl EntropyTrace {
    pub fn is_non_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].1 <= w[0].1)
    }

    pub fn initial(&self) -> f64 {
        self.entries.first().map(|e| e.1).unwrap_or(0.0)
    }

    pub fn last(&self) -> f64 {
        self.entries.last().map(|e| e.1).unwrap_or(0.0)
    }
}

/// Greedy Monte Carlo label refinement with incremental entropy updates.
///
/// Each step uniformly samples a record with at least two set bits, proposes
/// relabeling it to another of its set bits, and accepts only strict entropy
/// decreases. One-hot records are frozen: their label is forced by validity.
pub struct Refiner {
    signatures: Vec<Signature>,
    assignment: LabelAssignment,
    /// Cached weighted entropy per cluster, always derived from the counts.
    cluster_w: [f64; CLUSTERS],
    entropy: f64,
    /// Indices of records with >= 2 set bits.
    movable: Vec<usize>,
    total: f64,
    rng: ChaCha8Rng,
    iterations: u64,
}

impl Refiner {
    pub fn new(signatures: Vec<Signature>, assignment: LabelAssignment, seed: u64) -> Self {
        debug_assert_eq!(signatures.len(), assignment.labels.len());
        let mut cluster_w = [0.0; CLUSTERS];
        for c in 0..CLUSTERS {
            cluster_w[c] = weighted_cluster_entropy(&assignment.counts[c], assignment.sizes[c]);
        }
        let total = assignment.total() as f64;
        let entropy = if total > 0.0 {
            cluster_w.iter().sum::<f64>() / total
        } else {
            0.0
        };
        let movable = signatures
            .iter()
            .enumerate()
            .filter(|(_, s)| s.set_count() >= 2)
            .map(|(i, _)| i)
            .collect();
        Refiner {
            signatures,
            assignment,
            cluster_w,
            entropy,
            movable,
            total,
            rng: ChaCha8Rng::seed_from_u64(seed),
            iterations: 0,
        }
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn assignment(&self) -> &LabelAssignment {
        &self.assignment
    }

    pub fn into_assignment(self) -> LabelAssignment {
        self.assignment
    }

    /// Recomputes the entropy from the raw counts, bypassing the caches.
    /// Equal to `entropy()` up to floating-point identity by construction.
    pub fn recompute_entropy(&self) -> f64 {
        cluster_entropy(&self.assignment)
    }

    /// Runs one proposal; returns true when the move was accepted.
    pub fn step(&mut self) -> bool {
        self.iterations += 1;
        if self.movable.is_empty() {
            return false;
        }
        let idx = self.movable[self.rng.gen_range(0..self.movable.len())];
        let sig = self.signatures[idx];
        let from = self.assignment.labels[idx] as usize;
        let choices: Vec<usize> = sig.set_bits().filter(|&b| b != from).collect();
        let to = choices[self.rng.gen_range(0..choices.len())];

        let mut from_counts = self.assignment.counts[from];
        let mut to_counts = self.assignment.counts[to];
        for j in sig.set_bits() {
            from_counts[j] -= 1;
            to_counts[j] += 1;
        }
        let from_size = self.assignment.sizes[from] - 1;
        let to_size = self.assignment.sizes[to] + 1;
        let w_from = weighted_cluster_entropy(&from_counts, from_size);
        let w_to = weighted_cluster_entropy(&to_counts, to_size);

        // Sum all eight clusters in index order, exactly as a full recompute
        // would, so incremental and from-scratch entropies stay identical.
        let mut sum = 0.0;
        for c in 0..CLUSTERS {
            sum += if c == from {
                w_from
            } else if c == to {
                w_to
            } else {
                self.cluster_w[c]
            };
        }
        let new_entropy = sum / self.total;

        if new_entropy < self.entropy {
            self.assignment.counts[from] = from_counts;
            self.assignment.counts[to] = to_counts;
            self.assignment.sizes[from] = from_size;
            self.assignment.sizes[to] = to_size;
            self.assignment.labels[idx] = to as u8;
            self.cluster_w[from] = w_from;
            self.cluster_w[to] = w_to;
            self.entropy = new_entropy;
            true
        } else {
            false
        }
    }
}

/// Refines an assignment for `iters` iterations; returns the final assignment
/// and the entropy trace (initial value plus one entry per iteration).
pub fn monte_carlo_refine(
    signatures: &[Signature],
    initial: LabelAssignment,
    iters: u64,
    seed: u64,
) -> (LabelAssignment, EntropyTrace) {
    let mut refiner = Refiner::new(signatures.to_vec(), initial, seed);
    let mut entries = Vec::with_capacity(iters as usize + 1);
    entries.push((0, refiner.entropy()));
    for i in 1..=iters {
        refiner.step();
        entries.push((i, refiner.entropy()));
    }
    (refiner.into_assignment(), EntropyTrace { entries })
}

/// Drops records whose label's corpus share is below `min_share`.
///
/// Returns the indices of surviving records and the sorted retained label
/// list (the model's class set). A label with zero records is retained only
/// when `min_share` is 0.
pub fn filter_minority_labels(
    labels: &[u8],
    min_share: f64,
) -> Result<(Vec<usize>, Vec<u8>), LabelError> {
    let total = labels.len() as f64;
    let mut counts = [0u64; CLUSTERS];
    for &l in labels {
        counts[l as usize] += 1;
    }
    let classes: Vec<u8> = (0..CLUSTERS as u8)
        .filter(|&c| counts[c as usize] as f64 / total >= min_share)
        .collect();
    if classes.is_empty() {
        return Err(LabelError::NoClassesRetained);
    }
    let retained = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| classes.contains(l))
        .map(|(i, _)| i)
        .collect();
    Ok((retained, classes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(bits: [u8; 8]) -> Signature {
        Signature(bits)
    }

    #[test]
    fn prefix_label_returns_first_set_bit() {
        assert_eq!(prefix_label(&sig([0, 0, 1, 1, 1, 1, 1, 1])).unwrap(), 2);
        assert_eq!(prefix_label(&sig([1, 0, 0, 0, 0, 0, 0, 0])).unwrap(), 0);
        assert_eq!(prefix_label(&sig([0, 0, 0, 0, 0, 0, 0, 1])).unwrap(), 7);
        assert_eq!(
            prefix_label(&sig([0; 8])).unwrap_err(),
            LabelError::AllZeroSignature
        );
    }

    #[test]
    fn prefix_label_ignores_bits_after_the_first() {
        let a = prefix_label(&sig([0, 1, 1, 0, 1, 0, 0, 0])).unwrap();
        let b = prefix_label(&sig([0, 1, 0, 0, 0, 0, 0, 0])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pure_clusters_have_zero_entropy() {
        let sigs = vec![sig([1, 0, 0, 0, 0, 0, 0, 0]); 2];
        let a = LabelAssignment::from_prefix(&sigs).unwrap();
        assert_eq!(cluster_entropy(&a), 0.0);
    }

    #[test]
    fn half_split_bit_gives_eighth_of_a_bit() {
        let sigs = vec![sig([1, 1, 0, 0, 0, 0, 0, 0]), sig([1, 0, 0, 0, 0, 0, 0, 0])];
        let a = LabelAssignment::from_prefix(&sigs).unwrap();
        assert!((cluster_entropy(&a) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn identical_signatures_per_cluster_give_zero_entropy() {
        let sigs = vec![
            sig([1, 1, 0, 0, 0, 0, 0, 0]),
            sig([1, 1, 0, 0, 0, 0, 0, 0]),
            sig([0, 1, 1, 0, 0, 0, 0, 0]),
            sig([0, 1, 1, 0, 0, 0, 0, 0]),
        ];
        let a = LabelAssignment::from_prefix(&sigs).unwrap();
        assert_eq!(cluster_entropy(&a), 0.0);
    }

    #[test]
    fn one_hot_corpus_never_moves() {
        let sigs: Vec<Signature> = (0..20)
            .map(|i| {
                let mut bits = [0u8; 8];
                bits[i % 8] = 1;
                sig(bits)
            })
            .collect();
        let initial = LabelAssignment::from_prefix(&sigs).unwrap();
        let (refined, trace) = monte_carlo_refine(&sigs, initial.clone(), 500, 1);
        assert_eq!(refined, initial);
        assert!(trace.entries.iter().all(|e| e.1 == trace.initial()));
    }

    #[test]
    fn zero_iterations_is_identity() {
        let sigs = vec![sig([1, 1, 0, 0, 0, 0, 0, 0]); 4];
        let initial = LabelAssignment::from_prefix(&sigs).unwrap();
        let (refined, trace) = monte_carlo_refine(&sigs, initial.clone(), 0, 1);
        assert_eq!(refined, initial);
        assert_eq!(trace.entries.len(), 1);
    }

    #[test]
    fn refinement_strictly_lowers_entropy_when_a_good_move_exists() {
        // One two-bit record sits in a large near-pure cluster 0; moving it
        // to the smaller pure cluster 1 strictly decreases the entropy.
        let mut sigs = vec![sig([1, 1, 0, 0, 0, 0, 0, 0])];
        sigs.extend(vec![sig([1, 0, 0, 0, 0, 0, 0, 0]); 100]);
        sigs.extend(vec![sig([0, 1, 0, 0, 0, 0, 0, 0]); 30]);
        let initial = LabelAssignment::from_prefix(&sigs).unwrap();
        let initial_entropy = cluster_entropy(&initial);

        let (refined, trace) = monte_carlo_refine(&sigs, initial, 50, 7);
        assert!(trace.is_non_increasing());
        assert!(trace.last() < initial_entropy);
        assert_eq!(refined.labels[0], 1);
        assert!(refined.is_consistent(&sigs));
    }

    #[test]
    fn incremental_entropy_matches_recompute() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sigs: Vec<Signature> = (0..500)
            .map(|_| {
                let mut bits = [0u8; 8];
                for b in &mut bits {
                    *b = u8::from(rng.gen_bool(0.35));
                }
                if bits.iter().all(|&b| b == 0) {
                    bits[rng.gen_range(0..8)] = 1;
                }
                sig(bits)
            })
            .collect();
        let initial = LabelAssignment::from_prefix(&sigs).unwrap();
        let mut refiner = Refiner::new(sigs.clone(), initial, 99);
        for _ in 0..200 {
            for _ in 0..10 {
                refiner.step();
            }
            assert!((refiner.entropy() - refiner.recompute_entropy()).abs() < 1e-9);
            assert!(refiner.assignment().is_consistent(&sigs));
        }
    }

    #[test]
    fn labels_stay_on_set_bits_after_refinement() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sigs: Vec<Signature> = (0..300)
            .map(|_| {
                let mut bits = [0u8; 8];
                for b in &mut bits {
                    *b = u8::from(rng.gen_bool(0.4));
                }
                if bits.iter().all(|&b| b == 0) {
                    bits[0] = 1;
                }
                sig(bits)
            })
            .collect();
        let initial = LabelAssignment::from_prefix(&sigs).unwrap();
        let (refined, _) = monte_carlo_refine(&sigs, initial, 5000, 3);
        for (label, s) in refined.labels.iter().zip(&sigs) {
            assert!(s.is_set(*label as usize));
        }
    }

    #[test]
    fn filter_drops_subthreshold_labels() {
        let mut labels = Vec::new();
        for (label, count) in [(0, 400), (1, 300), (2, 200), (3, 80), (4, 10), (5, 5), (6, 3), (7, 2)]
        {
            labels.extend(std::iter::repeat(label as u8).take(count));
        }
        let (retained, classes) = filter_minority_labels(&labels, 0.02).unwrap();
        assert_eq!(classes, vec![0, 1, 2, 3]);
        assert_eq!(retained.len(), 980);
        assert!(retained.iter().all(|&i| classes.contains(&labels[i])));
    }

    #[test]
    fn zero_min_share_retains_all_classes() {
        let labels = vec![0u8, 1, 2];
        let (retained, classes) = filter_minority_labels(&labels, 0.0).unwrap();
        assert_eq!(classes, (0..8).collect::<Vec<u8>>());
        assert_eq!(retained.len(), 3);
    }

    #[test]
    fn uniform_shares_all_survive() {
        let labels: Vec<u8> = (0..8).flat_map(|c| vec![c; 10]).collect();
        let (_, classes) = filter_minority_labels(&labels, 0.02).unwrap();
        assert_eq!(classes.len(), 8);
    }

    #[test]
    fn filtering_everything_is_an_error() {
        let labels = vec![0u8; 10];
        // Label 0 has share 1.0; a threshold above 1 removes everything.
        // min_share is declared < 1, so exercise via empty corpus instead.
        let empty: Vec<u8> = Vec::new();
        assert_eq!(
            filter_minority_labels(&empty, 0.5).unwrap_err(),
            LabelError::NoClassesRetained
        );
        let (_, classes) = filter_minority_labels(&labels, 0.5).unwrap();
        assert_eq!(classes, vec![0]);
    }
}
