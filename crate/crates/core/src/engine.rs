//! The packing engine: four bin-assignment rules crossed with two
//! bin-allocation rules give the eight-heuristic portfolio.
//!
//! Assignment picks which already-open bin receives the current item;
//! allocation picks which bin type to open when nothing fits.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::instance::{PackedBin, PackingInstance, PackingResult, FIT_TOL};

/// How the current item is assigned to an open bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assignment {
    /// Tightest fitting open bin (least residual after placement).
    Best,
    /// Earliest-allocated open bin with room.
    First,
    /// Only the most recent bin stays open; a misfit closes it permanently.
    Next,
    /// Fitting open bin with the most room remaining.
    Worst,
}

/// Which bin type to open when no open bin fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Allocation {
    /// Smallest capacity that fits the current item.
    BestFit,
    /// Smallest capacity that fits everything not yet packed; falls back to
    /// the largest capacity when even that is too small.
    ExpectFit,
}

/// A portfolio heuristic: an (assignment, allocation) pair numbered 0-7.
///
/// The grid is row-major over assignments Best, First, Next, Worst and
/// columns BestFit, ExpectFit, so e.g. 2 = (First, BestFit) and
/// 5 = (Next, ExpectFit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeuristicId(u8);

/// Number of heuristics in the portfolio.
pub const HEURISTIC_COUNT: usize = 8;

impl HeuristicId {
    /// All eight heuristics in id order.
    pub const ALL: [HeuristicId; HEURISTIC_COUNT] = [
        HeuristicId(0),
        HeuristicId(1),
        HeuristicId(2),
        HeuristicId(3),
        HeuristicId(4),
        HeuristicId(5),
        HeuristicId(6),
        HeuristicId(7),
    ];

    pub fn new(id: u8) -> Option<Self> {
        (id < 8).then_some(HeuristicId(id))
    }

    pub fn from_parts(assignment: Assignment, allocation: Allocation) -> Self {
        let row = match assignment {
            Assignment::Best => 0,
            Assignment::First => 1,
            Assignment::Next => 2,
            Assignment::Worst => 3,
        };
        let col = match allocation {
            Allocation::BestFit => 0,
            Allocation::ExpectFit => 1,
        };
        HeuristicId(row * 2 + col)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn assignment(self) -> Assignment {
        match self.0 / 2 {
            0 => Assignment::Best,
            1 => Assignment::First,
            2 => Assignment::Next,
            _ => Assignment::Worst,
        }
    }

    pub fn allocation(self) -> Allocation {
        if self.0 % 2 == 0 {
            Allocation::BestFit
        } else {
            Allocation::ExpectFit
        }
    }
}

impl fmt::Display for HeuristicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One bin during a packing run.
#[derive(Debug, Clone)]
pub struct BinState {
    pub capacity: f64,
    pub used: f64,
    /// Cleared only by the Next rule; other rules keep every bin open.
    pub open: bool,
}

impl BinState {
    pub fn residual(&self) -> f64 {
        self.capacity - self.used
    }

    fn fits(&self, item: f64) -> bool {
        self.used + item <= self.capacity + FIT_TOL
    }
}

/// Open-bin state of a run, in allocation order.
#[derive(Debug, Clone, Default)]
pub struct OpenBinState {
    pub bins: Vec<BinState>,
}

/// Picks the open bin for `item` under `strategy`, or `None` when a new bin
/// is needed.
///
/// Under `Next`, a misfit permanently closes the single open bin as a side
/// effect. Ties on residual go to the earliest-allocated bin.
pub fn assign(item: f64, state: &mut OpenBinState, strategy: Assignment) -> Option<usize> {
    match strategy {
        Assignment::First => state
            .bins
            .iter()
            .position(|b| b.open && b.fits(item)),
        Assignment::Best => {
            let mut choice: Option<usize> = None;
            for (i, b) in state.bins.iter().enumerate() {
                if !b.open || !b.fits(item) {
                    continue;
                }
                match choice {
                    Some(j) if state.bins[j].residual() <= b.residual() => {}
                    _ => choice = Some(i),
                }
            }
            choice
        }
        Assignment::Worst => {
            let mut choice: Option<usize> = None;
            for (i, b) in state.bins.iter().enumerate() {
                if !b.open || !b.fits(item) {
                    continue;
                }
                match choice {
                    Some(j) if state.bins[j].residual() >= b.residual() => {}
                    _ => choice = Some(i),
                }
            }
            choice
        }
        Assignment::Next => {
            let open = state.bins.iter().position(|b| b.open)?;
            if state.bins[open].fits(item) {
                Some(open)
            } else {
                state.bins[open].open = false;
                None
            }
        }
    }
}

/// Capacity of the bin type to open for `item`.
///
/// `remaining_items` must include the current item; it drives the ExpectFit
/// lookahead. Feasibility (`item <= max capacity`) is an instance invariant.
pub fn allocate(
    item: f64,
    remaining_items: &[f64],
    bin_types: &[f64],
    strategy: Allocation,
) -> f64 {
    let max_cap = bin_types.iter().copied().fold(0.0, f64::max);
    let target = match strategy {
        Allocation::BestFit => item,
        Allocation::ExpectFit => {
            let sum: f64 = remaining_items.iter().sum();
            if sum > max_cap + FIT_TOL {
                return max_cap;
            }
            sum
        }
    };
    smallest_fitting(bin_types, target).unwrap_or(max_cap)
}

fn smallest_fitting(bin_types: &[f64], target: f64) -> Option<f64> {
    bin_types
        .iter()
        .copied()
        .filter(|&c| target <= c + FIT_TOL)
        .min_by(f64::total_cmp)
}

/// Packs the instance's items, in input order, under heuristic `h`.
///
/// Each item is assigned to an open bin when possible; otherwise a new bin is
/// allocated, appended, and receives the item. Deterministic for fixed input.
pub fn pack(inst: &PackingInstance, h: HeuristicId) -> PackingResult {
    let mut state = OpenBinState::default();
    let mut contents: Vec<Vec<f64>> = Vec::new();

    for (i, &item) in inst.items.iter().enumerate() {
        let slot = match assign(item, &mut state, h.assignment()) {
            Some(idx) => idx,
            None => {
                let cap = allocate(item, &inst.items[i..], &inst.bin_types, h.allocation());
                state.bins.push(BinState {
                    capacity: cap,
                    used: 0.0,
                    open: true,
                });
                contents.push(Vec::new());
                state.bins.len() - 1
            }
        };
        state.bins[slot].used += item;
        contents[slot].push(item);
    }

    let bins: Vec<PackedBin> = state
        .bins
        .iter()
        .zip(contents)
        .map(|(b, items)| PackedBin {
            capacity: b.capacity,
            items,
        })
        .collect();
    let cost = crate::instance::packing_cost(&bins);
    PackingResult {
        heuristic: Some(h),
        bins,
        cost,
    }
}
