//! Short-term traffic flow forecasting for heterogeneous traffic.
//!
//! Classified vehicle counts are converted to passenger car units (PCU),
//! binned into an evenly spaced series, run through a scalar Kalman filter
//! and scored with MAPE, RMSPE and correlation.
//!
//! ```
//! use flowcast::kalman::{filter_values, FilterParams};
//! use flowcast::evaluation::{evaluate, PercentDenominator};
//!
//! let flow = [410.0, 432.0, 425.0, 451.0, 470.0, 466.0, 489.0];
//! let params = FilterParams::random_walk(100.0, 50.0).unwrap();
//! let trace = filter_values(&flow, &params, 1e6).unwrap();
//! let report = evaluate(&flow[1..], &trace.forecasts(), PercentDenominator::Forecast).unwrap();
//! assert!(report.mape_percent < 10.0);
//! ```

pub mod cli;
pub mod evaluation;
pub mod io;
pub mod kalman;
pub mod pipeline;
pub mod series;
pub mod synth;
pub mod vehicle;

use thiserror::Error;

pub use evaluation::{evaluate, EvalError, EvaluationReport, QualityBand};
pub use kalman::{filter_series, FilterParams, FilterState, FilterTrace, KalmanError};
pub use series::{aggregate, FlowSeries, SeriesError, SeriesIssue};
pub use vehicle::{ClassifiedCount, PcuError, PcuTable, VehicleClass};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Pcu(#[from] PcuError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("invalid series: {}", join_issues(.0))]
    InvalidSeries(Vec<SeriesIssue>),
    #[error(transparent)]
    Kalman(#[from] KalmanError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Config(#[from] io::ConfigError),
}

impl From<io::PlotError> for Error {
    fn from(e: io::PlotError) -> Self {
        match e {
            io::PlotError::Eval(e) => Error::Eval(e),
            io::PlotError::Io(e) => Error::Io(e),
        }
    }
}

fn join_issues(issues: &[SeriesIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
