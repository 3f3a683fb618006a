//! Filter-and-score orchestration shared by the CLI subcommands.

use std::path::{Path, PathBuf};

use crate::evaluation::{evaluate, EvaluationReport};
use crate::io::{render_plots, write_report, write_series_csv, EvaluateMode, NoiseFit, ReportDocument, RunConfig};
use crate::kalman::{estimate_noise, filter_series, fit_noise, FilterParams, FilterTrace, NoiseEstimate};
use crate::series::{aggregate, FlowSeries};
use crate::vehicle::ClassifiedCount;
use crate::Error;

pub const SERIES_FILE: &str = "series.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub params: FilterParams,
    /// Present when `q` or `r` was estimated from the series.
    pub noise: Option<NoiseEstimate>,
    pub trace: FilterTrace,
    /// Observed values for bins `1..n`, the bins that have a forecast.
    pub observed: Vec<f64>,
    pub predicted: Vec<f64>,
    pub report: EvaluationReport,
}

pub fn series_from_counts(records: &[ClassifiedCount], config: &RunConfig) -> Result<FlowSeries, Error> {
    Ok(aggregate(
        records,
        &config.pcu_table,
        config.bin_duration,
        config.start_time,
    )?)
}

fn check(series: &FlowSeries) -> Result<(), Error> {
    let issues = series.validate();
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidSeries(issues))
    }
}

/// Filter parameters from the config, estimating whichever of `q` and `r`
/// is missing.
pub fn resolve_params(values: &[f64], config: &RunConfig) -> Result<(FilterParams, Option<NoiseEstimate>), Error> {
    let (a, h) = (config.transition, config.measurement);
    if let (Some(q), Some(r)) = (config.process_noise, config.measurement_noise) {
        return Ok((FilterParams::new(a, h, q, r)?, None));
    }
    let est = match config.noise_fit {
        NoiseFit::Likelihood => fit_noise(values, a, h)?,
        NoiseFit::Moments => estimate_noise(values)?,
    };
    let q = config.process_noise.unwrap_or(est.process_noise);
    let r = config.measurement_noise.unwrap_or(est.measurement_noise);
    Ok((FilterParams::new(a, h, q, r)?, Some(est)))
}

pub fn forecast(series: &FlowSeries, config: &RunConfig) -> Result<(FilterParams, FilterTrace), Error> {
    check(series)?;
    let (params, _) = resolve_params(series.values(), config)?;
    let trace = filter_series(series, &params, config.p0)?;
    Ok((params, trace))
}

/// Filters `series` and scores the output against bins `1..n`.
pub fn evaluate_series(series: &FlowSeries, config: &RunConfig) -> Result<PipelineOutput, Error> {
    check(series)?;
    let (params, noise) = resolve_params(series.values(), config)?;
    let trace = filter_series(series, &params, config.p0)?;
    let observed = series.values()[1..].to_vec();
    let predicted = match config.evaluate_mode {
        EvaluateMode::Predicted => trace.forecasts(),
        EvaluateMode::Filtered => trace.filtered(),
    };
    let report = evaluate(&observed, &predicted, config.percent_denominator)?;
    Ok(PipelineOutput {
        params,
        noise,
        trace,
        observed,
        predicted,
        report,
    })
}

/// Writes `report.json`, `report.csv` and the five plots into `out_dir`,
/// creating it if needed. Returns every written path.
pub fn write_outputs(
    series: &FlowSeries,
    output: &PipelineOutput,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, Error> {
    create_dir(out_dir)?;
    let doc = ReportDocument::new(output.report.clone(), &output.params, config.p0);
    let (json, csv) = write_report(&doc, &output.trace, series, &out_dir.join(REPORT_FILE))?;
    let mut files = vec![json, csv];
    files.extend(render_plots(
        &output.observed,
        &output.predicted,
        &output.report,
        config.histogram_bins,
        out_dir,
    )?);
    Ok(files)
}

/// Full run from counts: writes `series.csv` plus [`write_outputs`].
pub fn run(
    records: &[ClassifiedCount],
    config: &RunConfig,
    out_dir: &Path,
) -> Result<(PipelineOutput, Vec<PathBuf>), Error> {
    let series = series_from_counts(records, config)?;
    let output = evaluate_series(&series, config)?;
    create_dir(out_dir)?;
    let series_path = out_dir.join(SERIES_FILE);
    write_series_csv(&series, &series_path)?;
    let mut files = vec![series_path];
    files.extend(write_outputs(&series, &output, config, out_dir)?);
    Ok((output, files))
}

pub fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|source| {
        Error::Io(crate::io::IoError::Io {
            path: dir.to_path_buf(),
            source,
        })
    })
}
