//! Univariate location and scale pairs used by projection depth.

use serde::{Deserialize, Serialize};

/// The (location, scale) pair applied to every one-dimensional projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocationScale {
    /// Median and raw median absolute deviation (no consistency constant).
    #[default]
    MedianMad,
    /// Mean and standard deviation with the `n − 1` divisor.
    MeanSd,
}

impl LocationScale {
    pub fn name(self) -> &'static str {
        match self {
            LocationScale::MedianMad => "median-mad",
            LocationScale::MeanSd => "mean-sd",
        }
    }

    /// `(location, scale)` of `values`; reorders the buffer.
    pub fn estimate(self, values: &mut [f64]) -> (f64, f64) {
        match self {
            LocationScale::MedianMad => {
                let med = median_in_place(values);
                for v in values.iter_mut() {
                    *v = (*v - med).abs();
                }
                (med, median_in_place(values))
            }
            LocationScale::MeanSd => {
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                if values.len() < 2 {
                    return (mean, 0.0);
                }
                let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
                (mean, (ss / (n - 1.0)).sqrt())
            }
        }
    }
}

/// Median by selection; the mean of the two middle order statistics for even
/// lengths. Reorders `values`.
pub fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    assert!(n > 0, "median of an empty slice");
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (below + upper)
    }
}

/// Indices of the order statistics that define the median: one index for odd
/// lengths, the two middle ones for even lengths (lower first).
pub(crate) fn median_indices(values: &[f64], scratch: &mut Vec<usize>) -> (usize, usize) {
    let n = values.len();
    scratch.clear();
    scratch.extend(0..n);
    let mid = n / 2;
    let cmp = |a: &usize, b: &usize| values[*a].total_cmp(&values[*b]).then(a.cmp(b));
    let (lower, upper, _) = scratch.select_nth_unstable_by(mid, cmp);
    let hi = *upper;
    if n % 2 == 1 {
        (hi, hi)
    } else {
        let lo = *lower.iter().max_by(|a, b| cmp(a, b)).expect("even length has a lower half");
        (lo, hi)
    }
}
