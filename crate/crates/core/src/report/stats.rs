//! Distribution summaries: descriptive statistics and fixed-width histograms.
//!
//! Conventions, pinned for byte-identical reports:
//! * quartiles and median use linear interpolation between order statistics
//!   (`q(p) = x[floor(h)] + (h - floor(h)) * (x[floor(h)+1] - x[floor(h)])`,
//!   `h = p * (n - 1)`);
//! * the standard deviation is the population form (divide by `n`);
//! * histogram bins are half-open `[lo, hi)` except the last, which is closed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Linear-interpolation quantile of ascending `sorted` values.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summary statistics, or `None` for no values.
///
/// Values are summed in the order given; callers pass them in sample-id
/// order.
pub fn describe(values: &[f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(Stats {
        count: values.len(),
        mean,
        median: quantile(&sorted, 0.5),
        std: var.sqrt(),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        q1: quantile(&sorted, 0.25),
        q3: quantile(&sorted, 0.75),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges from `lo` to `hi`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Values below `lo`.
    pub below: u64,
    /// Values above `hi` (or NaN).
    pub above: u64,
}

impl Histogram {
    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    /// `(left edge, right edge, count)` per bin.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(e, &c)| (e[0], e[1], c))
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn histogram(values: &[f64], bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(Error::InvalidHistogram("bins must be >= 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidHistogram(format!("range [{lo}, {hi}]")));
    }
    let width = hi - lo;
    let edges = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 / bins as f64 })
        .collect::<Vec<_>>();
    let mut counts = vec![0u64; bins];
    let (mut below, mut above) = (0, 0);
    for &v in values {
        if v < lo {
            below += 1;
        } else if v > hi || v.is_nan() {
            above += 1;
        } else {
            // Search the edges directly so bin membership agrees with the
            // edges written to the report.
            let idx = edges[1..bins].partition_point(|&e| e <= v);
            counts[idx] += 1;
        }
    }
    Ok(Histogram {
        edges,
        counts,
        below,
        above,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_last_bin() {
        let h = histogram(&[0.25, 1.0], 2, (0.0, 1.0)).unwrap();
        assert_eq!(h.counts, vec![1, 1]);
        assert_eq!(h.edges, vec![0.0, 0.5, 1.0]);
        // An interior edge belongs to the bin on its right.
        assert_eq!(histogram(&[0.5, 1.0], 2, (0.0, 1.0)).unwrap().counts, vec![0, 2]);
    }

    #[test]
    fn hand_binning() {
        assert_eq!(histogram(&[0.25, 0.25, 0.75], 2, (0.0, 1.0)).unwrap().counts, vec![2, 1]);
        assert_eq!(histogram(&[], 4, (0.0, 1.0)).unwrap().counts, vec![0; 4]);
    }

    #[test]
    fn out_of_range_is_reported() {
        let h = histogram(&[-0.1, 0.0, 1.0, 1.5], 3, (0.0, 1.0)).unwrap();
        assert_eq!((h.below, h.above, h.in_range()), (1, 1, 2));
    }

    #[test]
    fn invalid_arguments() {
        assert!(histogram(&[0.1], 0, (0.0, 1.0)).is_err());
        assert!(histogram(&[0.1], 2, (1.0, 1.0)).is_err());
        assert!(histogram(&[0.1], 2, (1.0, 0.0)).is_err());
    }

    #[test]
    fn describe_two_values() {
        let s = describe(&[0.5, 1.0]).unwrap();
        assert_eq!(s.mean, 0.75);
        assert_eq!(s.median, 0.75);
        assert_eq!(s.min, 0.5);
        assert_eq!(s.max, 1.0);
        assert_eq!(s.std, 0.25);
        assert_eq!(s.q1, 0.625);
        assert_eq!(s.q3, 0.875);
    }

    #[test]
    fn describe_single_and_empty() {
        let s = describe(&[1.0]).unwrap();
        assert_eq!((s.mean, s.std, s.q1, s.median, s.q3), (1.0, 0.0, 1.0, 1.0, 1.0));
        assert!(describe(&[]).is_none());
    }

    #[test]
    fn quantiles_match_hand_values() {
        // h = 0.25 * 4 = 1 → x[1]; h = 0.75 * 4 = 3 → x[3]
        let s = describe(&[5.0, 1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        // n = 4: h = 0.75 → 1 + 0.75 * 1
        let s = describe(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.75, 2.5, 3.25));
    }

    proptest! {
        #[test]
        fn counts_partition_values(values in proptest::collection::vec(-0.5f64..1.5, 0..80), bins in 1usize..12) {
            let h = histogram(&values, bins, (0.0, 1.0)).unwrap();
            let in_range = values.iter().filter(|v| (0.0..=1.0).contains(*v)).count() as u64;
            prop_assert_eq!(h.in_range(), in_range);
            prop_assert_eq!(h.in_range() + h.below + h.above, values.len() as u64);
            for ((lo, hi, _), i) in h.bins().zip(0..) {
                let expected = values.iter().filter(|&&v| v >= lo && (v < hi || (i == bins - 1 && v == hi))).count() as u64;
                prop_assert_eq!(h.counts[i], expected);
            }
        }

        #[test]
        fn order_statistics(values in proptest::collection::vec(-10.0f64..10.0, 1..50)) {
            let s = describe(&values).unwrap();
            prop_assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
            prop_assert!(s.std >= 0.0);
        }
    }
}
