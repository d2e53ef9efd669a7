//! Variable-sized 1D bin packing with a portfolio of eight heuristics and a
//! learned per-instance selector.
//!
//! The pipeline stages map onto the modules below:
//!
//! - [`instance`] — items, bin catalogs, packings, the wasted-space cost and a
//!   brute-force optimal oracle for small instances.
//! - [`engine`] — the eight packing heuristics (four assignment rules × two
//!   allocation rules).
//! - [`profile`] — runs all heuristics on an instance and derives the binary
//!   performance signature.
//! - [`label`] — prefix labeling of signatures plus Monte Carlo entropy
//!   refinement and minority-class filtering.
//! - [`features`] — the 16 instance features fed to the classifier.
//! - [`nn`] — a from-scratch feed-forward classifier (batch norm, inverted
//!   dropout, softplus/softmax, Adamax).
//! - [`selector`] — end-to-end adaptive packing: featurize, predict, pack,
//!   with novelty-triggered dataset maintenance.
//! - [`generator`] — seeded synthetic order generator with mixed regimes.
//! - [`io`] — the line-delimited record formats and CSV reports shared by the
//!   CLI stages.
//!
//! All randomness is ChaCha8 seeded from explicit `u64` seeds; see [`seed`]
//! for the child-seed derivation used by composite stages.

pub mod engine;
pub mod features;
pub mod generator;
pub mod instance;
pub mod io;
pub mod label;
pub mod nn;
pub mod profile;
pub mod seed;
pub mod selector;

pub use engine::{pack, Allocation, Assignment, HeuristicId};
pub use features::{featurize, standardize, FeatureVector};

pub use instance::{
    optimal_cost_bruteforce, packing_cost, validate_instance, PackingInstance, PackingResult,
};
pub use label::{cluster_entropy, filter_minority_labels, monte_carlo_refine, prefix_label};

pub use profile::{normalize, profile, signature, ProfileRecord, Signature};

