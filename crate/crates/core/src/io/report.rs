//! JSON evaluation report (schema 1).
//!
//! ```json
//! {
//!   "schema": 1,
//!   "mape_percent": 14.62,
//!   "rmspe_percent": 18.73,
//!   "pearson_r": 0.937,
//!   "r_squared": 0.877969,
//!   "trend_slope": 11.2,
//!   "mape_band": "good",
//!   "rmspe_band": "acceptable",
//!   "observed_stats": { "count": .., "mean": .., "std_dev": .., "variance": ..,
//!                       "min": .., "max": .., "median": .., "q1": .., "q3": .. },
//!   "predicted_stats": { .. },
//!   "params": { "m_t": 1.0, "m_m": 1.0, "q": .., "r": .., "p0": 1000000.0 }
//! }
//! ```
//!
//! Numbers are written with shortest round-trip precision.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fs::write_atomic;
use super::tables::format_trace;
use super::IoError;
use crate::evaluation::EvaluationReport;
use crate::kalman::{FilterParams, FilterTrace};
use crate::series::FlowSeries;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub m_t: f64,
    pub m_m: f64,
    pub q: f64,
    pub r: f64,
    pub p0: f64,
}

impl ReportParams {
    pub fn new(params: &FilterParams, p0: f64) -> Self {
        Self {
            m_t: params.transition(),
            m_m: params.measurement(),
            q: params.process_noise(),
            r: params.measurement_noise(),
            p0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: u32,
    #[serde(flatten)]
    pub evaluation: EvaluationReport,
    pub params: ReportParams,
}

impl ReportDocument {
    pub fn new(evaluation: EvaluationReport, params: &FilterParams, p0: f64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            evaluation,
            params: ReportParams::new(params, p0),
        }
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        let mut text = serde_json::to_string_pretty(self).map_err(IoError::Json)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(IoError::Json)
    }
}

/// Path of the per-bin CSV written next to a report: `<stem>.csv`.
pub fn trace_path_for(json_path: &Path) -> PathBuf {
    json_path.with_extension("csv")
}

/// Writes the JSON report to `json_path` and the per-bin
/// observed/forecast/filtered table to [`trace_path_for`]`(json_path)`.
/// Returns both paths.
pub fn write_report(
    report: &ReportDocument,
    trace: &FilterTrace,
    series: &FlowSeries,
    json_path: &Path,
) -> Result<(PathBuf, PathBuf), IoError> {
    let csv_path = trace_path_for(json_path);
    write_atomic(json_path, report.to_json()?.as_bytes())?;
    write_atomic(&csv_path, format_trace(trace, series).as_bytes())?;
    Ok((json_path.to_path_buf(), csv_path))
}
