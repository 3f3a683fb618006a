//! Percent-error and correlation metrics.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Which series the percent errors are relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercentDenominator {
    /// `|forecast - observed| / |forecast|`, as in the original MAPE/RMSPE
    /// formulation used for the traffic study.
    #[default]
    Forecast,
    /// The conventional `|forecast - observed| / |observed|`.
    Observed,
}

impl std::str::FromStr for PercentDenominator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "forecast" => Ok(Self::Forecast),
            "observed" => Ok(Self::Observed),
            other => Err(format!("expected 'forecast' or 'observed', got '{other}'")),
        }
    }
}

fn percent_errors(forecast: &[f64], observed: &[f64], denominator: PercentDenominator) -> Result<Vec<f64>, EvalError> {
    if forecast.len() != observed.len() {
        return Err(EvalError::LengthMismatch(forecast.len(), observed.len()));
    }
    if forecast.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    forecast
        .iter()
        .zip(observed)
        .enumerate()
        .map(|(i, (&f, &o))| {
            let base = match denominator {
                PercentDenominator::Forecast => f,
                PercentDenominator::Observed => o,
            };
            if base == 0.0 {
                return Err(EvalError::ZeroDenominator(i));
            }
            let e = (f - o) / base;
            if e.is_finite() {
                Ok(e)
            } else {
                Err(EvalError::NonFinite)
            }
        })
        .collect()
}

/// Mean absolute percent error, relative to the forecast.
pub fn mape(forecast: &[f64], observed: &[f64]) -> Result<f64, EvalError> {
    mape_with(forecast, observed, PercentDenominator::Forecast)
}

pub fn mape_with(forecast: &[f64], observed: &[f64], denominator: PercentDenominator) -> Result<f64, EvalError> {
    let errs = percent_errors(forecast, observed, denominator)?;
    Ok(100.0 * errs.iter().map(|e| e.abs()).sum::<f64>() / errs.len() as f64)
}

/// Root mean square percent error, relative to the forecast.
pub fn rmspe(forecast: &[f64], observed: &[f64]) -> Result<f64, EvalError> {
    rmspe_with(forecast, observed, PercentDenominator::Forecast)
}

pub fn rmspe_with(forecast: &[f64], observed: &[f64], denominator: PercentDenominator) -> Result<f64, EvalError> {
    let errs = percent_errors(forecast, observed, denominator)?;
    Ok(100.0 * (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(EvalError::TooShort { len: a.len(), min: 2 });
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    if !r.is_finite() {
        return Err(EvalError::NonFinite);
    }
    Ok(r.clamp(-1.0, 1.0))
}

/// Squared Pearson correlation.
pub fn r_squared(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    pearson(a, b).map(|r| r * r)
}

/// Ordinary least-squares slope of `values` against their index.
pub fn trend_slope(values: &[f64]) -> Result<f64, EvalError> {
    if values.len() < 2 {
        return Err(EvalError::TooShort {
            len: values.len(),
            min: 2,
        });
    }
    let n = values.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = mean(values);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &y) in values.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}
