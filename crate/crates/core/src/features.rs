//! Instance features for the selector: seven item statistics, six box
//! statistics, and three cross ratios describing how items relate to the
//! available box sizes.

use serde::{Deserialize, Serialize};

use crate::instance::{PackingInstance, FIT_TOL};

/// Number of features.
pub const FEATURE_DIM: usize = 16;

/// Feature names in serialization order; frozen as the on-disk schema.
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "num_items",
    "item_volume_sum",
    "item_volume_min",
    "item_volume_max",
    "item_volume_mean",
    "item_volume_std",
    "item_volume_var",
    "num_boxes",
    "box_size_min",
    "box_size_max",
    "box_size_mean",
    "box_size_std",
    "box_size_var",
    "avg_fill_ratio",
    "avg_min_fill_ratio",
    "avg_max_fill_ratio",
];

/// The 16 raw features of an instance.
///
/// Item and box statistics are population statistics (variance divisor N, so
/// single-element lists get variance 0). The cross ratios are:
///
/// - `avg_fill_ratio`: mean over items of item / (mean capacity among box
///   types that fit the item),
/// - `avg_min_fill_ratio`: mean over items of item / max box capacity,
/// - `avg_max_fill_ratio`: mean over items of item / (smallest capacity that
///   fits the item).
///
/// All three are invariant under uniform scaling of items and boxes. The
/// fitting-capacity mean in the middle form keeps
/// `avg_min_fill_ratio <= avg_fill_ratio <= avg_max_fill_ratio` for every
/// instance: the largest capacity always fits, so the fitting mean lies
/// between the smallest fitting capacity and the catalog maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub num_items: f64,
    pub item_volume_sum: f64,
    pub item_volume_min: f64,
    pub item_volume_max: f64,
    pub item_volume_mean: f64,
    pub item_volume_std: f64,
    pub item_volume_var: f64,
    pub num_boxes: f64,
    pub box_size_min: f64,
    pub box_size_max: f64,
    pub box_size_mean: f64,
    pub box_size_std: f64,
    pub box_size_var: f64,
    pub avg_fill_ratio: f64,
    pub avg_min_fill_ratio: f64,
    pub avg_max_fill_ratio: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; FEATURE_DIM] {
        [
            self.num_items,
            self.item_volume_sum,
            self.item_volume_min,
            self.item_volume_max,
            self.item_volume_mean,
            self.item_volume_std,
            self.item_volume_var,
            self.num_boxes,
            self.box_size_min,
            self.box_size_max,
            self.box_size_mean,
            self.box_size_std,
            self.box_size_var,
            self.avg_fill_ratio,
            self.avg_min_fill_ratio,
            self.avg_max_fill_ratio,
        ]
    }
}

fn population_stats(values: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = values.len() as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (min, max, mean, var.sqrt(), var)
}

/// Extracts the 16 raw features from a validated instance.
pub fn featurize(inst: &PackingInstance) -> FeatureVector {
    let (i_min, i_max, i_mean, i_std, i_var) = population_stats(&inst.items);
    let (b_min, b_max, b_mean, b_std, b_var) = population_stats(&inst.bin_types);
    let n = inst.items.len() as f64;

    let mut avg_fill = 0.0;
    let mut avg_min_fill = 0.0;
    let mut avg_max_fill = 0.0;
    for &t in &inst.items {
        let mut fitting_sum = 0.0;
        let mut fitting_count = 0.0;
        let mut tightest = f64::INFINITY;
        for &c in &inst.bin_types {
            if t <= c + FIT_TOL {
                fitting_sum += c;
                fitting_count += 1.0;
                tightest = tightest.min(c);
            }
        }
        avg_fill += t / (fitting_sum / fitting_count);
        avg_min_fill += t / b_max;
        avg_max_fill += t / tightest;
    }
    avg_fill /= n;
    avg_min_fill /= n;
    avg_max_fill /= n;

    FeatureVector {
        num_items: n,
        item_volume_sum: inst.items.iter().sum(),
        item_volume_min: i_min,
        item_volume_max: i_max,
        item_volume_mean: i_mean,
        item_volume_std: i_std,
        item_volume_var: i_var,
        num_boxes: inst.bin_types.len() as f64,
        box_size_min: b_min,
        box_size_max: b_max,
        box_size_mean: b_mean,
        box_size_std: b_std,
        box_size_var: b_var,
        avg_fill_ratio: avg_fill,
        avg_min_fill_ratio: avg_min_fill,
        avg_max_fill_ratio: avg_max_fill,
    }
}

/// Z-scores a feature vector with the given per-feature mean and standard
/// deviation. Deviations below 1e-12 are treated as 1, so constant features
/// pass through centered instead of blowing up.
pub fn standardize(
    fv: &FeatureVector,
    mean: &[f64; FEATURE_DIM],
    std: &[f64; FEATURE_DIM],
) -> [f64; FEATURE_DIM] {
    let raw = fv.as_array();
    std::array::from_fn(|i| {
        let s = if std[i] < 1e-12 { 1.0 } else { std[i] };
        (raw[i] - mean[i]) / s
    })
}

/// Per-feature population mean and standard deviation over a corpus.
pub fn corpus_stats(features: &[[f64; FEATURE_DIM]]) -> ([f64; FEATURE_DIM], [f64; FEATURE_DIM]) {
    let n = features.len() as f64;
    let mut mean = [0.0; FEATURE_DIM];
    for row in features {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = [0.0; FEATURE_DIM];
    for row in features {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = std::array::from_fn(|i| (var[i] / n).sqrt());
    (mean, std)
}
