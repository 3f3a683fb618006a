//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.
//! Settings come from defaults, then the config file (`--config`, else
//! `$FLOWCAST_CONFIG`), then flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::io::{
    format_series, read_counts_csv, read_series_csv, sniff_csv, write_atomic, write_counts_csv, write_trace_csv,
    ConfigError, CsvKind, RunConfig,
};
use crate::kalman::forecast_next;
use crate::pipeline::{self, PipelineOutput};
use crate::synth::{generate_with, preset, presets};
use crate::Error;

pub const CONFIG_ENV: &str = "FLOWCAST_CONFIG";
const DEFAULT_OUT_DIR: &str = "results";

#[derive(Debug, Parser)]
#[command(
    name = "flowcast",
    version,
    about = "Kalman-filter traffic flow forecasting from classified vehicle counts"
)]
struct Cli {
    /// key = value config file (default: $FLOWCAST_CONFIG)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Aggregate a counts CSV into a PCU series CSV
    Convert {
        counts: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Filter a series or counts CSV, write the trace and print forecasts
    Forecast {
        input: PathBuf,
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
        /// Bins to forecast past the end of the series
        #[arg(long)]
        horizon: Option<String>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Score the filter on a series CSV and write report and plots
    Evaluate {
        series: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Generate a synthetic counts CSV
    Simulate {
        #[arg(long, default_value = "paper-like")]
        preset: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Seconds
        #[arg(long)]
        duration: Option<u64>,
        #[arg(long)]
        bin_duration: Option<u64>,
        #[arg(long, allow_negative_numbers = true)]
        start_time: Option<i64>,
        #[arg(long)]
        base_flow: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        trend: Option<f64>,
        #[arg(long)]
        noise_cv: Option<f64>,
    },
    /// Counts CSV to series, report and plots in one go
    Run {
        counts: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
}

/// Flags mirroring config keys; applied after the config file.
#[derive(Debug, Args)]
struct Settings {
    #[arg(long, value_name = "SECONDS")]
    bin_duration: Option<String>,
    #[arg(long, value_name = "TIME")]
    start_time: Option<String>,
    #[arg(long)]
    p0: Option<String>,
    #[arg(long = "m-t", value_name = "FACTOR", allow_negative_numbers = true)]
    m_t: Option<String>,
    #[arg(long = "m-m", value_name = "FACTOR", allow_negative_numbers = true)]
    m_m: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    r: Option<String>,
    /// likelihood | moments
    #[arg(long)]
    noise_fit: Option<String>,
    /// forecast | observed
    #[arg(long)]
    percent_denominator: Option<String>,
    /// predicted | filtered
    #[arg(long)]
    evaluate_mode: Option<String>,
    #[arg(long)]
    histogram_bins: Option<String>,
    /// Override a PCU factor, e.g. --pcu cycle_rickshaw=1.5 (repeatable)
    #[arg(long, value_name = "CLASS=FACTOR")]
    pcu: Vec<String>,
}

impl Settings {
    fn apply(&self, config: &mut RunConfig) -> Result<(), ConfigError> {
        let pairs = [
            ("bin_duration", &self.bin_duration),
            ("start_time", &self.start_time),
            ("p0", &self.p0),
            ("m_t", &self.m_t),
            ("m_m", &self.m_m),
            ("q", &self.q),
            ("r", &self.r),
            ("noise_fit", &self.noise_fit),
            ("percent_denominator", &self.percent_denominator),
            ("evaluate_mode", &self.evaluate_mode),
            ("histogram_bins", &self.histogram_bins),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                config.apply(key, v)?;
            }
        }
        for spec in &self.pcu {
            let (class, factor) = spec.split_once('=').ok_or_else(|| ConfigError::InvalidValue {
                key: "pcu".into(),
                value: spec.clone(),
                reason: "expected CLASS=FACTOR".into(),
            })?;
            config.apply(&format!("pcu.{}", class.trim()), factor)?;
        }
        Ok(())
    }
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(e) => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn data_err(e: impl Into<Error>) -> Failure {
    Failure::from(e.into())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Never panics on bad input.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match std::panic::catch_unwind(|| execute(cli)) {
        Ok(Ok(())) => 0,
        Ok(Err(Failure::Usage(msg))) => {
            eprintln!("error: {msg}");
            1
        }
        Ok(Err(Failure::Data(msg))) => {
            eprintln!("error: {msg}");
            2
        }
        Err(_) => {
            eprintln!("error: internal failure");
            2
        }
    }
}

fn base_config(explicit: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let from_env = std::env::var_os(CONFIG_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    match explicit.map(Path::to_path_buf).or(from_env) {
        Some(path) => RunConfig::from_file(&path),
        None => Ok(RunConfig::default()),
    }
}

fn load_config(explicit: Option<&Path>, settings: &Settings) -> Result<RunConfig, ConfigError> {
    let mut config = base_config(explicit)?;
    settings.apply(&mut config)?;
    Ok(config)
}

fn out_dir(flag: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    flag.or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn stdout_write(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Failure::Data(format!("stdout: {e}"))),
    }
}

fn summary(output: &PipelineOutput) -> String {
    let r = &output.report;
    format!(
        "MAPE {:.2}% ({}), RMSPE {:.2}% ({}), r {:.3}, R\u{b2} {:.3}, trend {:+.2} PCU/bin\n",
        r.mape_percent, r.mape_band, r.rmspe_percent, r.rmspe_band, r.pearson_r, r.r_squared, r.trend_slope
    )
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let explicit = cli.config.as_deref();
    match cli.command {
        Command::Convert { counts, out, settings } => {
            let config = load_config(explicit, &settings)?;
            let records = read_counts_csv(&counts).map_err(data_err)?;
            let series = pipeline::series_from_counts(&records, &config)?;
            let text = format_series(&series);
            match out {
                Some(path) => write_atomic(&path, text.as_bytes()).map_err(data_err)?,
                None => stdout_write(&text)?,
            }
        }
        Command::Forecast {
            input,
            out,
            horizon,
            settings,
        } => {
            let mut config = load_config(explicit, &settings)?;
            if let Some(h) = horizon {
                config.apply("horizon", &h)?;
            }
            let series = match sniff_csv(&input).map_err(data_err)? {
                CsvKind::Counts => {
                    let records = read_counts_csv(&input).map_err(data_err)?;
                    pipeline::series_from_counts(&records, &config)?
                }
                CsvKind::Series => read_series_csv(&input, config.bin_duration).map_err(data_err)?,
            };
            let (params, trace) = pipeline::forecast(&series, &config)?;
            write_trace_csv(&trace, &series, &out).map_err(data_err)?;
            let ahead = forecast_next(&trace.final_state(), &params, config.horizon);
            let mut text = String::from("bin_start,forecast\n");
            let last = series.len() - 1;
            for (k, f) in ahead.iter().enumerate() {
                text.push_str(&format!("{},{}\n", series.bin_start(last + k + 1), f));
            }
            stdout_write(&text)?;
        }
        Command::Evaluate {
            series,
            out_dir: dir,
            settings,
        } => {
            let config = load_config(explicit, &settings)?;
            let dir = out_dir(dir, &config);
            let series = read_series_csv(&series, config.bin_duration).map_err(data_err)?;
            let output = pipeline::evaluate_series(&series, &config)?;
            pipeline::write_outputs(&series, &output, &config, &dir)?;
            stdout_write(&summary(&output))?;
        }
        Command::Simulate {
            preset: name,
            out,
            seed,
            duration,
            bin_duration,
            start_time,
            base_flow,
            trend,
            noise_cv,
        } => {
            let config = base_config(explicit)?;
            let mut scenario = preset(&name).map_err(|e| {
                let names: Vec<_> = presets().iter().map(|(n, _)| *n).collect();
                Failure::Usage(format!("{e}; try one of: {}", names.join(", ")))
            })?;
            scenario.seed = seed.unwrap_or(scenario.seed);
            scenario.duration = duration.unwrap_or(scenario.duration);
            scenario.bin_duration = bin_duration.unwrap_or(scenario.bin_duration);
            scenario.start_time = start_time.unwrap_or(scenario.start_time);
            scenario.base_flow = base_flow.unwrap_or(scenario.base_flow);
            scenario.trend = trend.unwrap_or(scenario.trend);
            scenario.noise_cv = noise_cv.unwrap_or(scenario.noise_cv);
            let records = generate_with(&scenario, &config.pcu_table).map_err(|e| Failure::Usage(e.to_string()))?;
            write_counts_csv(&records, &out).map_err(data_err)?;
        }
        Command::Run {
            counts,
            out_dir: dir,
            settings,
        } => {
            let config = load_config(explicit, &settings)?;
            let dir = out_dir(dir, &config);
            let records = read_counts_csv(&counts).map_err(data_err)?;
            let (output, _) = pipeline::run(&records, &config, &dir)?;
            stdout_write(&summary(&output))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> i32 {
        cli_main(std::iter::once("flowcast").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(&[]), 1);
        assert_eq!(run(&["frobnicate"]), 1);
        assert_eq!(run(&["run", "x.csv", "--bin-duration", "0"]), 1);
        assert_eq!(run(&["simulate", "--preset", "nope", "--out", "/tmp/never.csv"]), 1);
        assert_eq!(run(&["--help"]), 0);
    }

    #[test]
    fn missing_input_is_data_error() {
        assert_eq!(run(&["run", "/definitely/missing.csv"]), 2);
    }

    #[test]
    fn simulate_run_forecast() {
        let dir = tempfile::tempdir().unwrap();
        let counts = dir.path().join("counts.csv");
        let results = dir.path().join("results");
        let c = counts.to_str().unwrap();
        assert_eq!(run(&["simulate", "--out", c]), 0);
        assert_eq!(run(&["run", c, "--out-dir", results.to_str().unwrap()]), 0);
        for name in ["series.csv", "report.json", "report.csv"]
            .iter()
            .chain(crate::io::PLOT_FILES.iter())
        {
            assert!(results.join(name).exists(), "{name}");
        }
        let trace = dir.path().join("trace.csv");
        assert_eq!(
            run(&["forecast", c, "--out", trace.to_str().unwrap(), "--horizon", "3"]),
            0
        );
        let series = results.join("series.csv");
        assert_eq!(
            run(&[
                "evaluate",
                series.to_str().unwrap(),
                "--out-dir",
                dir.path().join("eval").to_str().unwrap()
            ]),
            0
        );
        assert_eq!(
            std::fs::read(results.join("report.json")).unwrap(),
            std::fs::read(dir.path().join("eval/report.json")).unwrap()
        );
    }
}
