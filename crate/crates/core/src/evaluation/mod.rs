//! Forecast accuracy: percent errors, correlation, descriptive statistics and
//! the MAPE/RMSPE quality bands.

mod metrics;
mod stats;

pub use metrics::{mape, mape_with, pearson, r_squared, rmspe, rmspe_with, trend_slope, PercentDenominator};
pub use stats::{descriptive, histogram, quantile_sorted, DescriptiveStats, HistogramBin};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("zero percent-error denominator at index {0}")]
    ZeroDenominator(usize),
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("series has {len} values, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("metric must be >= 0, got {0}")]
    NegativeMetric(f64),
    #[error("non-finite value")]
    NonFinite,
    #[error("{0}")]
    InvalidArgument(String),
}

/// Qualitative reading of a MAPE or RMSPE value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityBand {
    HighAccuracy,
    Good,
    Decent,
    Bad,
    Acceptable,
    RecalibrationRequired,
}

impl QualityBand {
    /// Position within its own scale, 0 = best.
    pub fn rank(self) -> u8 {
        match self {
            QualityBand::HighAccuracy | QualityBand::Acceptable => 0,
            QualityBand::Good | QualityBand::RecalibrationRequired => 1,
            QualityBand::Decent => 2,
            QualityBand::Bad => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QualityBand::HighAccuracy => "high_accuracy",
            QualityBand::Good => "good",
            QualityBand::Decent => "decent",
            QualityBand::Bad => "bad",
            QualityBand::Acceptable => "acceptable",
            QualityBand::RecalibrationRequired => "recalibration_required",
        }
    }
}

impl std::fmt::Display for QualityBand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_metric(value: f64) -> Result<(), EvalError> {
    if value.is_nan() {
        Err(EvalError::NonFinite)
    } else if value < 0.0 {
        Err(EvalError::NegativeMetric(value))
    } else {
        Ok(())
    }
}

/// `< 10` high accuracy, `[10, 20)` good, `[20, 50)` decent, `>= 50` bad.
pub fn mape_band(mape_percent: f64) -> Result<QualityBand, EvalError> {
    check_metric(mape_percent)?;
    Ok(match mape_percent {
        m if m < 10.0 => QualityBand::HighAccuracy,
        m if m < 20.0 => QualityBand::Good,
        m if m < 50.0 => QualityBand::Decent,
        _ => QualityBand::Bad,
    })
}

/// `<= 25` acceptable, otherwise recalibration required.
pub fn rmspe_band(rmspe_percent: f64) -> Result<QualityBand, EvalError> {
    check_metric(rmspe_percent)?;
    Ok(if rmspe_percent <= 25.0 {
        QualityBand::Acceptable
    } else {
        QualityBand::RecalibrationRequired
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mape_percent: f64,
    pub rmspe_percent: f64,
    pub pearson_r: f64,
    pub r_squared: f64,
    /// OLS slope of the observed values, PCU per bin.
    pub trend_slope: f64,
    pub mape_band: QualityBand,
    pub rmspe_band: QualityBand,
    pub observed_stats: DescriptiveStats,
    pub predicted_stats: DescriptiveStats,
}

/// Scores `predicted` against `observed`, pairwise by index.
pub fn evaluate(
    observed: &[f64],
    predicted: &[f64],
    denominator: PercentDenominator,
) -> Result<EvaluationReport, EvalError> {
    let mape_percent = mape_with(predicted, observed, denominator)?;
    let rmspe_percent = rmspe_with(predicted, observed, denominator)?;
    let pearson_r = pearson(observed, predicted)?;
    Ok(EvaluationReport {
        mape_percent,
        rmspe_percent,
        pearson_r,
        r_squared: pearson_r * pearson_r,
        trend_slope: trend_slope(observed)?,
        mape_band: mape_band(mape_percent)?,
        rmspe_band: rmspe_band(rmspe_percent)?,
        observed_stats: descriptive(observed)?,
        predicted_stats: descriptive(predicted)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mape_bands() {
        assert_eq!(mape_band(14.62).unwrap(), QualityBand::Good);
        assert_eq!(mape_band(0.0).unwrap(), QualityBand::HighAccuracy);
        assert_eq!(mape_band(9.999).unwrap(), QualityBand::HighAccuracy);
        assert_eq!(mape_band(10.0).unwrap(), QualityBand::Good);
        assert_eq!(mape_band(20.0).unwrap(), QualityBand::Decent);
        assert_eq!(mape_band(50.0).unwrap(), QualityBand::Bad);
        assert_eq!(mape_band(-1.0).unwrap_err(), EvalError::NegativeMetric(-1.0));
    }

    #[test]
    fn rmspe_bands() {
        assert_eq!(rmspe_band(18.73).unwrap(), QualityBand::Acceptable);
        assert_eq!(rmspe_band(0.0).unwrap(), QualityBand::Acceptable);
        assert_eq!(rmspe_band(25.0).unwrap(), QualityBand::Acceptable);
        assert_eq!(rmspe_band(25.0001).unwrap(), QualityBand::RecalibrationRequired);
        assert!(rmspe_band(f64::NAN).is_err());
    }

    #[test]
    fn band_serialization() {
        assert_eq!(serde_json::to_string(&QualityBand::Good).unwrap(), "\"good\"");
        assert_eq!(
            serde_json::to_string(&QualityBand::RecalibrationRequired).unwrap(),
            "\"recalibration_required\""
        );
    }

    #[test]
    fn report_fields() {
        let observed = [100.0, 120.0, 130.0, 160.0];
        let predicted = [110.0, 115.0, 140.0, 150.0];
        let r = evaluate(&observed, &predicted, PercentDenominator::Forecast).unwrap();
        assert_eq!(r.mape_percent, mape(&predicted, &observed).unwrap());
        assert!(r.rmspe_percent >= r.mape_percent);
        assert_eq!(r.r_squared, r.pearson_r * r.pearson_r);
        assert!(r.trend_slope > 0.0);
        assert_eq!(r.observed_stats.count, 4);
    }

    proptest! {
        #[test]
        fn bands_monotone(a in 0.0f64..200.0, b in 0.0f64..200.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(mape_band(lo).unwrap().rank() <= mape_band(hi).unwrap().rank());
            prop_assert!(rmspe_band(lo).unwrap().rank() <= rmspe_band(hi).unwrap().rank());
        }
    }
}
