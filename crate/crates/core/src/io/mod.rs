//! File formats, configuration and plots.

pub mod config;
pub mod fs;
pub mod report;
pub mod svg;
pub mod tables;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ConfigError, EvaluateMode, NoiseFit, RunConfig};
pub use fs::write_atomic;
pub use report::{trace_path_for, write_report, ReportDocument, ReportParams, SCHEMA_VERSION};
pub use svg::{render_plots, PlotError, PLOT_FILES};
pub use tables::{
    format_counts, format_series, format_trace, parse_counts, parse_series, read_counts_csv, read_series_csv,
    sniff_csv, write_counts_csv, write_series_csv, write_trace_csv, CsvKind,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: unknown vehicle class '{label}'")]
    UnknownVehicleClass { line: u64, label: String },
    #[error("no data rows")]
    EmptyInput,
    #[error("line {line}: expected header '{expected}', found '{found}'")]
    BadHeader { line: u64, expected: String, found: String },
    #[error("JSON: {0}")]
    Json(serde_json::Error),
}
