//! Core domain types: packing instances, packing results, the wasted-space
//! cost, and a brute-force optimal oracle for small instances.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::engine::HeuristicId;

/// Absolute tolerance for all "fits" comparisons on real-valued sizes.
pub const FIT_TOL: f64 = 1e-9;

/// An item set plus the catalog of available bin capacities.
///
/// Bin types are available in unlimited supply; feasibility only requires
/// that the largest item fits the largest bin type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingInstance {
    pub id: String,
    pub items: Vec<f64>,
    #[serde(rename = "bins")]
    pub bin_types: Vec<f64>,
}

impl PackingInstance {
    pub fn new(id: impl Into<String>, items: Vec<f64>, bin_types: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            items,
            bin_types,
        }
    }

    /// Largest bin capacity in the catalog; 0 when the catalog is empty.
    pub fn max_capacity(&self) -> f64 {
        self.bin_types.iter().copied().fold(0.0, f64::max)
    }
}

/// One opened bin in a packing: its capacity and the items placed in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackedBin {
    pub capacity: f64,
    pub items: Vec<f64>,
}

impl PackedBin {
    pub fn used(&self) -> f64 {
        self.items.iter().sum()
    }
}

/// A complete packing of an instance.
///
/// `heuristic` is `None` for packings that did not come from the portfolio
/// (the brute-force oracle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub heuristic: Option<HeuristicId>,
    pub bins: Vec<PackedBin>,
    pub cost: f64,
}

/// Violations of the `PackingInstance` invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidateError {
    EmptyItems,
    NonPositiveSize,
    /// An item exceeds the largest bin type.
    InfeasibleItem,
    DuplicateBinType,
}

impl fmt::Display for ValidateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidateError::EmptyItems => write!(f, "instance has no items"),
            ValidateError::NonPositiveSize => {
                write!(f, "item sizes and bin capacities must be positive")
            }
            ValidateError::InfeasibleItem => {
                write!(f, "an item exceeds the largest bin capacity")
            }
            ValidateError::DuplicateBinType => write!(f, "bin catalog contains a duplicate"),
        }
    }
}

impl std::error::Error for ValidateError {}

/// Checks all `PackingInstance` invariants, returning the instance on success.
pub fn validate_instance(inst: &PackingInstance) -> Result<&PackingInstance, ValidateError> {
    if inst.items.is_empty() {
        return Err(ValidateError::EmptyItems);
    }
    if inst.items.iter().any(|&s| !(s > 0.0)) || inst.bin_types.iter().any(|&c| !(c > 0.0)) {
        return Err(ValidateError::NonPositiveSize);
    }
    let max_item = inst.items.iter().copied().fold(0.0, f64::max);
    if max_item > inst.max_capacity() + FIT_TOL {
        return Err(ValidateError::InfeasibleItem);
    }
    let mut caps = inst.bin_types.clone();
    caps.sort_by(f64::total_cmp);
    if caps.windows(2).any(|w| w[0] == w[1]) {
        return Err(ValidateError::DuplicateBinType);
    }
    Ok(inst)
}

/// Wasted-space cost of a packing: each bin contributes `1 - fill_ratio`.
pub fn packing_cost(bins: &[PackedBin]) -> f64 {
    bins.iter().map(|b| 1.0 - b.used() / b.capacity).sum()
}

/// Ways a `PackingResult` can violate its invariants against an instance.
#[derive(Debug, Clone, PartialEq)]
pub enum PackingViolation {
    /// Multiset of packed items differs from the instance items.
    ItemsNotConserved,
    /// Some bin's contents exceed its capacity.
    CapacityExceeded { bin: usize },
    EmptyBin { bin: usize },
    /// Stored cost disagrees with the recomputed wasted-space cost.
    CostMismatch { stored: f64, recomputed: f64 },
    /// A bin capacity is not in the instance catalog.
    UnknownCapacity { bin: usize },
}

impl fmt::Display for PackingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PackingViolation::ItemsNotConserved => write!(f, "packed items differ from instance"),
            PackingViolation::CapacityExceeded { bin } => {
                write!(f, "bin {bin} exceeds its capacity")
            }
            PackingViolation::EmptyBin { bin } => write!(f, "bin {bin} is empty"),
            PackingViolation::CostMismatch { stored, recomputed } => {
                write!(f, "stored cost {stored} != recomputed {recomputed}")
            }
            PackingViolation::UnknownCapacity { bin } => {
                write!(f, "bin {bin} has a capacity outside the catalog")
            }
        }
    }
}

impl std::error::Error for PackingViolation {}

/// Shared validity checker: item conservation, capacity, no empty bins, and
/// cost consistency. Every packing produced anywhere in the system must pass.
pub fn validate_packing(
    inst: &PackingInstance,
    result: &PackingResult,
) -> Result<(), PackingViolation> {
    let mut packed: Vec<f64> = result.bins.iter().flat_map(|b| b.items.clone()).collect();
    let mut expected = inst.items.clone();
    packed.sort_by(f64::total_cmp);
    expected.sort_by(f64::total_cmp);
    if packed != expected {
        return Err(PackingViolation::ItemsNotConserved);
    }
    for (i, bin) in result.bins.iter().enumerate() {
        if bin.items.is_empty() {
            return Err(PackingViolation::EmptyBin { bin: i });
        }
        if bin.used() > bin.capacity + FIT_TOL {
            return Err(PackingViolation::CapacityExceeded { bin: i });
        }
        if !inst.bin_types.contains(&bin.capacity) {
            return Err(PackingViolation::UnknownCapacity { bin: i });
        }
    }
    let recomputed = packing_cost(&result.bins);
    if (recomputed - result.cost).abs() > 1e-12 {
        return Err(PackingViolation::CostMismatch {
            stored: result.cost,
            recomputed,
        });
    }
    Ok(())
}

/// Error from the brute-force oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// Instance exceeds the enumeration limit.
    TooLarge { items: usize, limit: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { items, limit } => {
                write!(f, "{items} items exceed the oracle limit of {limit}")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Default item-count limit for [`optimal_cost_bruteforce`].
pub const ORACLE_DEFAULT_LIMIT: usize = 8;

/// Minimum wasted-space cost over all set partitions of the items combined
/// with the cheapest feasible bin type per part.
///
/// Partitions are enumerated as restricted-growth strings in lexicographic
/// order; per part the smallest capacity that fits the part sum is optimal,
/// so bin choice is separable given the partition. Ties are broken by fewer
/// bins, then by the first partition encountered in enumeration order.
pub fn optimal_cost_bruteforce(
    inst: &PackingInstance,
    limit: usize,
) -> Result<(f64, PackingResult), OracleError> {
    let m = inst.items.len();
    if m > limit {
        return Err(OracleError::TooLarge { items: m, limit });
    }
    let mut caps = inst.bin_types.clone();
    caps.sort_by(f64::total_cmp);

    let mut best: Option<(f64, Vec<PackedBin>)> = None;
    // Restricted-growth string: rgs[i] = part index of item i, rgs[0] = 0,
    // rgs[i] <= 1 + max(rgs[..i]).
    let mut rgs = vec![0usize; m];
    loop {
        if let Some(bins) = bins_for_partition(&inst.items, &rgs, &caps) {
            let cost = packing_cost(&bins);
            let better = match &best {
                None => true,
                Some((bc, bb)) => {
                    cost < bc - 1e-12 || ((cost - bc).abs() <= 1e-12 && bins.len() < bb.len())
                }
            };
            if better {
                best = Some((cost, bins));
            }
        }
        if !next_rgs(&mut rgs) {
            break;
        }
    }

    // max(items) <= max(caps) guarantees the all-singletons partition is
    // feasible, so `best` is always populated for a validated instance.
    let (cost, bins) = best.expect("validated instance has a feasible partition");
    Ok((
        cost,
        PackingResult {
            heuristic: None,
            bins,
            cost,
        },
    ))
}

fn bins_for_partition(items: &[f64], rgs: &[usize], sorted_caps: &[f64]) -> Option<Vec<PackedBin>> {
    let parts = rgs.iter().copied().max().unwrap_or(0) + 1;
    let mut bins: Vec<PackedBin> = (0..parts)
        .map(|_| PackedBin {
            capacity: 0.0,
            items: Vec::new(),
        })
        .collect();
    for (i, &part) in rgs.iter().enumerate() {
        bins[part].items.push(items[i]);
    }
    for bin in &mut bins {
        let sum = bin.used();
        let cap = sorted_caps.iter().copied().find(|&c| sum <= c + FIT_TOL)?;
        bin.capacity = cap;
    }
    Some(bins)
}

fn next_rgs(rgs: &mut [usize]) -> bool {
    let m = rgs.len();
    for i in (1..m).rev() {
        let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
        if rgs[i] <= max_prefix {
            rgs[i] += 1;
            for r in rgs[i + 1..].iter_mut() {
                *r = 0;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(items: &[f64], bins: &[f64]) -> PackingInstance {
        PackingInstance::new("t", items.to_vec(), bins.to_vec())
    }

    #[test]
    fn validate_accepts_minimal_instance() {
        assert!(validate_instance(&inst(&[5.0], &[10.0])).is_ok());
    }

    #[test]
    fn validate_rejects_oversized_item() {
        assert_eq!(
            validate_instance(&inst(&[12.0], &[10.0])).unwrap_err(),
            ValidateError::InfeasibleItem
        );
    }

    #[test]
    fn validate_rejects_empty_items() {
        assert_eq!(
            validate_instance(&inst(&[], &[10.0])).unwrap_err(),
            ValidateError::EmptyItems
        );
    }

    #[test]
    fn validate_rejects_nonpositive_and_duplicates() {
        assert_eq!(
            validate_instance(&inst(&[0.0], &[10.0])).unwrap_err(),
            ValidateError::NonPositiveSize
        );
        assert_eq!(
            validate_instance(&inst(&[1.0], &[10.0, -1.0])).unwrap_err(),
            ValidateError::NonPositiveSize
        );
        assert_eq!(
            validate_instance(&inst(&[1.0], &[10.0, 10.0])).unwrap_err(),
            ValidateError::DuplicateBinType
        );
    }

    #[test]
    fn cost_of_half_full_bin() {
        let bins = [PackedBin {
            capacity: 10.0,
            items: vec![5.0],
        }];
        assert_eq!(packing_cost(&bins), 0.5);
    }

    #[test]
    fn cost_of_exactly_full_bins_is_zero() {
        let bins = [
            PackedBin {
                capacity: 10.0,
                items: vec![6.0, 4.0],
            },
            PackedBin {
                capacity: 5.0,
                items: vec![3.0, 2.0],
            },
        ];
        assert_eq!(packing_cost(&bins), 0.0);
    }

    #[test]
    fn cost_sums_per_bin_waste() {
        let bins = [
            PackedBin {
                capacity: 10.0,
                items: vec![6.0],
            },
            PackedBin {
                capacity: 5.0,
                items: vec![3.0],
            },
        ];
        assert!((packing_cost(&bins) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn cost_is_invariant_under_reordering() {
        let a = [
            PackedBin {
                capacity: 10.0,
                items: vec![6.0, 3.0],
            },
            PackedBin {
                capacity: 5.0,
                items: vec![2.0],
            },
        ];
        let b = [
            PackedBin {
                capacity: 5.0,
                items: vec![2.0],
            },
            PackedBin {
                capacity: 10.0,
                items: vec![3.0, 6.0],
            },
        ];
        assert!((packing_cost(&a) - packing_cost(&b)).abs() < 1e-12);
    }

    #[test]
    fn oracle_finds_exact_fill() {
        let i = inst(&[6.0, 4.0, 3.0, 2.0], &[10.0, 5.0]);
        let (cost, result) = optimal_cost_bruteforce(&i, ORACLE_DEFAULT_LIMIT).unwrap();
        assert!(cost.abs() < 1e-12);
        validate_packing(&i, &result).unwrap();
    }

    #[test]
    fn oracle_prefers_exact_fit_bin() {
        let i = inst(&[5.0], &[10.0, 5.0]);
        let (cost, result) = optimal_cost_bruteforce(&i, ORACLE_DEFAULT_LIMIT).unwrap();
        assert!(cost.abs() < 1e-12);
        assert_eq!(result.bins.len(), 1);
        assert_eq!(result.bins[0].capacity, 5.0);
    }

    #[test]
    fn oracle_splits_when_forced() {
        let i = inst(&[7.0, 7.0], &[10.0]);
        let (cost, result) = optimal_cost_bruteforce(&i, ORACLE_DEFAULT_LIMIT).unwrap();
        assert!((cost - 0.6).abs() < 1e-12);
        assert_eq!(result.bins.len(), 2);
    }

    #[test]
    fn oracle_rejects_large_instances() {
        let items = vec![1.0; 9];
        assert_eq!(
            optimal_cost_bruteforce(&inst(&items, &[10.0]), 8).unwrap_err(),
            OracleError::TooLarge { items: 9, limit: 8 }
        );
    }

    #[test]
    fn oracle_cost_is_scale_invariant() {
        let a = inst(&[6.0, 4.0, 3.0], &[10.0, 5.0]);
        let b = inst(&[18.0, 12.0, 9.0], &[30.0, 15.0]);
        let (ca, _) = optimal_cost_bruteforce(&a, 8).unwrap();
        let (cb, _) = optimal_cost_bruteforce(&b, 8).unwrap();
        assert!((ca - cb).abs() < 1e-9);
    }

    #[test]
    fn checker_catches_violations() {
        let i = inst(&[6.0, 4.0], &[10.0]);
        let ok = PackingResult {
            heuristic: None,
            bins: vec![PackedBin {
                capacity: 10.0,
                items: vec![6.0, 4.0],
            }],
            cost: 0.0,
        };
        assert!(validate_packing(&i, &ok).is_ok());

        let missing = PackingResult {
            heuristic: None,
            bins: vec![PackedBin {
                capacity: 10.0,
                items: vec![6.0],
            }],
            cost: 0.4,
        };
        assert_eq!(
            validate_packing(&i, &missing).unwrap_err(),
            PackingViolation::ItemsNotConserved
        );

        let overfull = PackingResult {
            heuristic: None,
            bins: vec![
                PackedBin {
                    capacity: 5.0,
                    items: vec![6.0],
                },
                PackedBin {
                    capacity: 10.0,
                    items: vec![4.0],
                },
            ],
            cost: 0.0,
        };
        assert!(matches!(
            validate_packing(&i, &overfull).unwrap_err(),
            PackingViolation::UnknownCapacity { .. } | PackingViolation::CapacityExceeded { .. }
        ));
    }
}
