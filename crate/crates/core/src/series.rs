//! Fixed-interval PCU flow series.
//!
//! Bins are half-open: value `i` covers
//! `[start_time + i * bin_duration, start_time + (i + 1) * bin_duration)`,
//! so a record exactly on a boundary belongs to the later bin. Empty interior
//! bins are zero-filled and a trailing partial bin is kept as a raw count.

use serde::Serialize;
use thiserror::Error;

use crate::vehicle::{ClassifiedCount, PcuTable};

pub const DEFAULT_BIN_DURATION: u64 = 300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("no records to aggregate")]
    EmptyInput,
    #[error("record at t={0} precedes the series start time")]
    RecordBeforeStart(i64),
    #[error("bin duration must be > 0")]
    ZeroBinDuration,
    #[error("record span is too long for bin duration {0}s")]
    TooManyBins(u64),
    #[error("timestamp {0} is outside the representable range")]
    TimestampOutOfRange(i64),
}

/// Evenly spaced PCU values starting at `start_time` (epoch seconds).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSeries {
    start_time: i64,
    bin_duration: u64,
    values: Vec<f64>,
}

/// Upper bound on series length accepted by [`aggregate`]. Nearly ten years
/// of 5-minute bins; anything larger is almost certainly a bad timestamp.
pub const MAX_BINS: u64 = 1_000_000;

impl FlowSeries {
    pub fn new(start_time: i64, bin_duration: u64, values: Vec<f64>) -> Result<Self, SeriesError> {
        if bin_duration == 0 {
            return Err(SeriesError::ZeroBinDuration);
        }
        Ok(Self {
            start_time,
            bin_duration,
            values,
        })
    }

    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    pub fn bin_duration(&self) -> u64 {
        self.bin_duration
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Start of bin `i` in epoch seconds.
    pub fn bin_start(&self, i: usize) -> i64 {
        let offset = (i as i64).saturating_mul(self.bin_duration.min(i64::MAX as u64) as i64);
        self.start_time.saturating_add(offset)
    }

    pub fn bin_starts(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.values.len()).map(|i| self.bin_start(i))
    }

    pub fn validate(&self) -> Vec<SeriesIssue> {
        validate_series(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesIssue {
    ZeroLength,
    NegativeValue { index: usize },
    NonFiniteValue { index: usize },
}

impl std::fmt::Display for SeriesIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeriesIssue::ZeroLength => write!(f, "series is empty"),
            SeriesIssue::NegativeValue { index } => write!(f, "negative value at bin {index}"),
            SeriesIssue::NonFiniteValue { index } => write!(f, "non-finite value at bin {index}"),
        }
    }
}

/// Reports every structural problem with `series`; an empty list means it is
/// usable for filtering.
pub fn validate_series(series: &FlowSeries) -> Vec<SeriesIssue> {
    if series.values.is_empty() {
        return vec![SeriesIssue::ZeroLength];
    }
    series
        .values
        .iter()
        .enumerate()
        .filter_map(|(index, &v)| {
            if !v.is_finite() {
                Some(SeriesIssue::NonFiniteValue { index })
            } else if v < 0.0 {
                Some(SeriesIssue::NegativeValue { index })
            } else {
                None
            }
        })
        .collect()
}

/// Aggregates classified counts into PCU per bin.
///
/// Without an explicit `start_time`, the series starts at the earliest record
/// truncated down to a multiple of `bin_duration`. The series always extends
/// through the bin holding the latest record.
pub fn aggregate(
    records: &[ClassifiedCount],
    table: &PcuTable,
    bin_duration: u64,
    start_time: Option<i64>,
) -> Result<FlowSeries, SeriesError> {
    if bin_duration == 0 {
        return Err(SeriesError::ZeroBinDuration);
    }
    let (first, last) = records
        .iter()
        .map(|r| r.timestamp)
        .fold(None, |acc: Option<(i64, i64)>, t| match acc {
            None => Some((t, t)),
            Some((lo, hi)) => Some((lo.min(t), hi.max(t))),
        })
        .ok_or(SeriesError::EmptyInput)?;

    let width = i128::from(bin_duration);
    let start = match start_time {
        Some(s) if first < s => return Err(SeriesError::RecordBeforeStart(first)),
        Some(s) => i128::from(s),
        None => i128::from(first).div_euclid(width) * width,
    };
    if start < i128::from(i64::MIN) || width > i128::from(i64::MAX) {
        return Err(SeriesError::TimestampOutOfRange(first));
    }
    let n_bins = (i128::from(last) - start) / width + 1;
    if n_bins > i128::from(MAX_BINS) {
        return Err(SeriesError::TooManyBins(bin_duration));
    }

    let mut values = vec![0.0; n_bins as usize];
    for r in records {
        let idx = ((i128::from(r.timestamp) - start) / width) as usize;
        values[idx] += r.pcu(table);
    }
    FlowSeries::new(start as i64, bin_duration, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::VehicleClass::{self, *};
    use proptest::prelude::*;

    fn rec(t: i64, c: VehicleClass, n: u64) -> ClassifiedCount {
        ClassifiedCount::new(t, c, n)
    }

    fn series(values: Vec<f64>) -> FlowSeries {
        FlowSeries::new(0, 300, values).unwrap()
    }

    #[test]
    fn single_record() {
        let s = aggregate(&[rec(0, Bus, 1)], &PcuTable::default(), 300, None).unwrap();
        assert_eq!(s.values(), &[3.0]);
        assert_eq!(s.start_time(), 0);
    }

    #[test]
    fn same_half_open_bin() {
        let recs = [rec(0, PrivateCar, 2), rec(299, Bicycle, 2)];
        let s = aggregate(&recs, &PcuTable::default(), 300, None).unwrap();
        assert_eq!(s.values(), &[3.0]);
    }

    #[test]
    fn boundary_opens_next_bin() {
        let recs = [rec(0, Bus, 1), rec(300, Bus, 1)];
        let s = aggregate(&recs, &PcuTable::default(), 300, None).unwrap();
        assert_eq!(s.values(), &[3.0, 3.0]);
    }

    #[test]
    fn interior_gaps_zero_filled_and_start_truncated() {
        let recs = [rec(1_000, Bus, 1), rec(2_000, Truck, 1)];
        let s = aggregate(&recs, &PcuTable::default(), 300, None).unwrap();
        assert_eq!(s.start_time(), 900);
        assert_eq!(s.values(), &[3.0, 0.0, 0.0, 3.0]);
        assert_eq!(s.bin_starts().collect::<Vec<_>>(), vec![900, 1200, 1500, 1800]);
    }

    #[test]
    fn negative_timestamps_truncate_down() {
        let s = aggregate(&[rec(-1, Bus, 1)], &PcuTable::default(), 300, None).unwrap();
        assert_eq!(s.start_time(), -300);
    }

    #[test]
    fn explicit_start() {
        let recs = [rec(650, Bus, 1)];
        let s = aggregate(&recs, &PcuTable::default(), 300, Some(0)).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0, 3.0]);
        assert_eq!(
            aggregate(&recs, &PcuTable::default(), 300, Some(700)).unwrap_err(),
            SeriesError::RecordBeforeStart(650)
        );
    }

    #[test]
    fn errors() {
        let t = PcuTable::default();
        assert_eq!(aggregate(&[], &t, 300, None).unwrap_err(), SeriesError::EmptyInput);
        assert_eq!(
            aggregate(&[rec(0, Bus, 1)], &t, 0, None).unwrap_err(),
            SeriesError::ZeroBinDuration
        );
        let far = [rec(i64::MIN, Bus, 1), rec(i64::MAX, Bus, 1)];
        assert_eq!(aggregate(&far, &t, 1, None).unwrap_err(), SeriesError::TooManyBins(1));
    }

    #[test]
    fn validation() {
        assert!(validate_series(&series(vec![225.0, 927.0])).is_empty());
        assert_eq!(validate_series(&series(vec![])), vec![SeriesIssue::ZeroLength]);
        assert_eq!(
            validate_series(&series(vec![-1.0])),
            vec![SeriesIssue::NegativeValue { index: 0 }]
        );
        assert_eq!(
            validate_series(&series(vec![1.0, f64::NAN, -2.0])),
            vec![
                SeriesIssue::NonFiniteValue { index: 1 },
                SeriesIssue::NegativeValue { index: 2 }
            ]
        );
    }

    fn records() -> impl Strategy<Value = Vec<ClassifiedCount>> {
        prop::collection::vec(
            (0i64..7_200, 0usize..9, 0u64..40).prop_map(|(t, c, n)| rec(t, VehicleClass::ALL[c], n)),
            1..80,
        )
    }

    proptest! {
        #[test]
        fn conservation(recs in records()) {
            let t = PcuTable::default();
            let s = aggregate(&recs, &t, 300, None).unwrap();
            let total: f64 = s.values().iter().sum();
            let direct = t
                .to_pcu(recs.iter().map(|r| (r.vehicle_class, r.count as i64)))
                .unwrap();
            prop_assert!((total - direct).abs() <= 1e-9 * direct.max(1.0));
        }

        #[test]
        fn permutation_invariant(recs in records(), seed in any::<u64>()) {
            let t = PcuTable::default();
            let mut shuffled = recs.clone();
            // deterministic Fisher-Yates driven by a simple LCG
            let mut state = seed;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            let a = aggregate(&recs, &t, 300, None).unwrap();
            let b = aggregate(&shuffled, &t, 300, None).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn refinement(recs in records()) {
            let t = PcuTable::default();
            let fine = aggregate(&recs, &t, 300, Some(0)).unwrap();
            let coarse = aggregate(&recs, &t, 600, Some(0)).unwrap();
            let merged: Vec<f64> = fine.values().chunks(2).map(|c| c.iter().sum()).collect();
            prop_assert_eq!(merged.len(), coarse.len());
            for (m, c) in merged.iter().zip(coarse.values()) {
                prop_assert!((m - c).abs() <= 1e-9 * c.abs().max(1.0));
            }
        }
    }
}
