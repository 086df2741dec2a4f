use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Five-number summary with Tukey hinges and 1.5·IQR whiskers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    /// Lower whisker end: the smallest value not below `q1 - 1.5·IQR`.
    pub low: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Upper whisker end: the largest value not above `q3 + 1.5·IQR`.
    pub high: f64,
    pub outliers: Vec<f64>,
    pub count: usize,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Summary of a non-empty sample. The hinges are the medians of the lower and
/// upper halves, each half including the median when the count is odd.
pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let half = n.div_ceil(2);
    let q1 = median(&sorted[..half]);
    let q3 = median(&sorted[n - half..]);
    let iqr = q3 - q1;
    let (fence_low, fence_high) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || sorted.iter().copied().filter(|v| (fence_low..=fence_high).contains(v));
    Some(BoxStats {
        low: inside().next().unwrap_or(q1),
        q1,
        median: median(&sorted),
        q3,
        high: inside().last().unwrap_or(q3),
        outliers: sorted
            .iter()
            .copied()
            .filter(|v| !(fence_low..=fence_high).contains(v))
            .collect(),
        count: n,
    })
}
