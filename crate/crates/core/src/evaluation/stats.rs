//! Descriptive statistics and histograms.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Summary of one series. Quantiles use linear interpolation between closest
/// ranks (`h = (n - 1) p`), the same rule numpy and seaborn boxplots use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std_dev: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Quantile `p` of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn descriptive(values: &[f64]) -> Result<DescriptiveStats, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Ok(DescriptiveStats {
        count: n,
        mean,
        std_dev: variance.sqrt(),
        variance,
        min: sorted[0],
        max: sorted[n - 1],
        median: quantile_sorted(&sorted, 0.5),
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lower_edge: f64,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]`; the maximum lands in the last bin.
/// A zero-width range yields a single bin holding every value.
pub fn histogram(values: &[f64], bin_count: usize) -> Result<Vec<HistogramBin>, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if bin_count == 0 {
        return Err(EvalError::InvalidArgument("bin count must be >= 1".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bin_count as f64;
    if width == 0.0 || !width.is_finite() {
        return Ok(vec![HistogramBin {
            lower_edge: min,
            count: values.len(),
        }]);
    }
    let mut counts = vec![0usize; bin_count];
    for &v in values {
        let idx = (((v - min) / width).floor() as usize).min(bin_count - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lower_edge: min + width * i as f64,
            count,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_value() {
        let s = descriptive(&[5.0]).unwrap();
        assert_eq!((s.mean, s.std_dev, s.median, s.min, s.max), (5.0, 0.0, 5.0, 5.0, 5.0));
        assert_eq!(s.count, 1);
    }

    #[test]
    fn four_values() {
        let s = descriptive(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        // Σ(v - 2.5)² = 5, / 3
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.std_dev - 1.2910).abs() < 1e-4);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.q3, 3.25);
    }

    #[test]
    fn range_endpoints() {
        let s = descriptive(&[927.0, 225.0]).unwrap();
        assert_eq!((s.min, s.max), (225.0, 927.0));
        assert_eq!(descriptive(&[]).unwrap_err(), EvalError::EmptyInput);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[1.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(
            h,
            vec![HistogramBin {
                lower_edge: 1.0,
                count: 3
            }]
        );

        let h = histogram(&[0.0, 1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(
            h,
            vec![
                HistogramBin {
                    lower_edge: 0.0,
                    count: 2
                },
                HistogramBin {
                    lower_edge: 1.5,
                    count: 2
                }
            ]
        );

        let h = histogram(&[5.0], 3).unwrap();
        assert_eq!(
            h,
            vec![HistogramBin {
                lower_edge: 5.0,
                count: 1
            }]
        );

        assert!(histogram(&[], 3).is_err());
        assert!(histogram(&[1.0], 0).is_err());
    }

    proptest! {
        #[test]
        fn histogram_counts_sum(v in prop::collection::vec(-1e4f64..1e4, 1..200), bins in 1usize..20) {
            let h = histogram(&v, bins).unwrap();
            prop_assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), v.len());
        }

        #[test]
        fn ordered_summary(v in prop::collection::vec(-1e4f64..1e4, 1..100)) {
            let s = descriptive(&v).unwrap();
            prop_assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
            prop_assert!(s.std_dev >= 0.0);
        }

        #[test]
        fn shift_equivariance(v in prop::collection::vec(-1e3f64..1e3, 2..100), c in -1e3f64..1e3) {
            let a = descriptive(&v).unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let b = descriptive(&shifted).unwrap();
            let tol = 1e-9;
            prop_assert!((b.mean - a.mean - c).abs() < tol);
            prop_assert!((b.median - a.median - c).abs() < tol);
            prop_assert!((b.min - a.min - c).abs() < tol);
            prop_assert!((b.max - a.max - c).abs() < tol);
            prop_assert!((b.std_dev - a.std_dev).abs() < 1e-7);
        }

        #[test]
        fn permutation_keeps_mean(mut v in prop::collection::vec(-1e3f64..1e3, 1..60)) {
            let a = descriptive(&v).unwrap();
            v.reverse();
            let b = descriptive(&v).unwrap();
            prop_assert!((a.mean - b.mean).abs() <= 1e-12 * a.mean.abs().max(1.0) * 1e3);
            prop_assert_eq!(a.median, b.median);
        }
    }
}
