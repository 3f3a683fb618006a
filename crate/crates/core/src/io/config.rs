//! Run configuration: a flat `key = value` file, overridable by CLI flags.
//!
//! ```text
//! # comments start with '#'
//! bin_duration = 300
//! p0 = 1e6
//! m_t = 1
//! m_m = 1
//! q = 25            # omit q / r to estimate them from the series
//! r = 900
//! noise_fit = likelihood     # or: moments
//! percent_denominator = forecast   # or: observed
//! evaluate_mode = predicted        # or: filtered
//! histogram_bins = 8
//! horizon = 6
//! out_dir = results
//! pcu.cycle_rickshaw = 2.0
//! ```
//!
//! Keys may use `-` or `_`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::evaluation::PercentDenominator;
use crate::kalman::DEFAULT_P0;
use crate::series::DEFAULT_BIN_DURATION;
use crate::vehicle::{parse_vehicle_class, PcuTable};

/// Longest accepted bin: one week.
const MAX_BIN_DURATION: u64 = 7 * 24 * 3600;
const MAX_HISTOGRAM_BINS: usize = 1_000;
const MAX_HORIZON: usize = 100_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: expected 'key = value'")]
    Syntax { line: usize },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for {key}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseFit {
    /// Maximum-likelihood `q / r` ratio.
    #[default]
    Likelihood,
    /// First-difference method of moments.
    Moments,
}

/// Which filter output is scored against the observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvaluateMode {
    /// One-step-ahead forecasts (causal).
    #[default]
    Predicted,
    /// Posterior estimates after absorbing each observation.
    Filtered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bin_duration: u64,
    pub start_time: Option<i64>,
    pub p0: f64,
    pub transition: f64,
    pub measurement: f64,
    pub process_noise: Option<f64>,
    pub measurement_noise: Option<f64>,
    pub noise_fit: NoiseFit,
    pub percent_denominator: PercentDenominator,
    pub evaluate_mode: EvaluateMode,
    pub histogram_bins: usize,
    pub horizon: usize,
    pub out_dir: Option<PathBuf>,
    pub pcu_table: PcuTable,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bin_duration: DEFAULT_BIN_DURATION,
            start_time: None,
            p0: DEFAULT_P0,
            transition: 1.0,
            measurement: 1.0,
            process_noise: None,
            measurement_noise: None,
            noise_fit: NoiseFit::default(),
            percent_denominator: PercentDenominator::default(),
            evaluate_mode: EvaluateMode::default(),
            histogram_bins: 8,
            horizon: 6,
            out_dir: None,
            pcu_table: PcuTable::default(),
        }
    }
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value.parse().map_err(|_| invalid(key, value, "not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, value, "must be finite"))
    }
}

fn parse_nonneg(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = parse_f64(key, value)?;
    if v < 0.0 {
        return Err(invalid(key, value, "must be >= 0"));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| invalid(key, value, "not an integer"))
}

fn parse_bounded(key: &str, value: &str, max: usize) -> Result<usize, ConfigError> {
    let v: usize = parse_int(key, value)?;
    if v == 0 || v > max {
        return Err(invalid(key, value, format!("must be in 1..={max}")));
    }
    Ok(v)
}

impl RunConfig {
    /// Sets one key. Values are validated immediately.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let norm = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.trim();
        match norm.as_str() {
            "bin_duration" => {
                let v: u64 = parse_int(key, value)?;
                if v == 0 || v > MAX_BIN_DURATION {
                    return Err(invalid(key, value, format!("must be in 1..={MAX_BIN_DURATION}")));
                }
                self.bin_duration = v;
            }
            "start_time" => {
                let t = super::tables::parse_timestamp(value).map_err(|e| invalid(key, value, e))?;
                self.start_time = Some(t);
            }
            "p0" => self.p0 = parse_nonneg(key, value)?,
            "m_t" | "transition" => self.transition = parse_f64(key, value)?,
            "m_m" | "measurement" => {
                let v = parse_f64(key, value)?;
                if v == 0.0 {
                    return Err(invalid(key, value, "must be non-zero"));
                }
                self.measurement = v;
            }
            "q" | "process_noise" => self.process_noise = Some(parse_nonneg(key, value)?),
            "r" | "measurement_noise" => self.measurement_noise = Some(parse_nonneg(key, value)?),
            "noise_fit" => {
                self.noise_fit = match value.to_ascii_lowercase().as_str() {
                    "likelihood" => NoiseFit::Likelihood,
                    "moments" => NoiseFit::Moments,
                    _ => return Err(invalid(key, value, "expected 'likelihood' or 'moments'")),
                }
            }
            "percent_denominator" => {
                self.percent_denominator = value.parse().map_err(|e: String| invalid(key, value, e))?
            }
            "evaluate_mode" => {
                self.evaluate_mode = match value.to_ascii_lowercase().as_str() {
                    "predicted" => EvaluateMode::Predicted,
                    "filtered" => EvaluateMode::Filtered,
                    _ => return Err(invalid(key, value, "expected 'predicted' or 'filtered'")),
                }
            }
            "histogram_bins" => self.histogram_bins = parse_bounded(key, value, MAX_HISTOGRAM_BINS)?,
            "horizon" => self.horizon = parse_bounded(key, value, MAX_HORIZON)?,
            "out_dir" => {
                if value.is_empty() {
                    return Err(invalid(key, value, "must not be empty"));
                }
                self.out_dir = Some(PathBuf::from(value));
            }
            other => {
                let Some(label) = other.strip_prefix("pcu.") else {
                    return Err(ConfigError::UnknownKey(key.trim().to_string()));
                };
                let class = parse_vehicle_class(label).map_err(|_| ConfigError::UnknownKey(key.trim().to_string()))?;
                let factor = parse_f64(key, value)?;
                self.pcu_table = self
                    .pcu_table
                    .with_factor(class, factor)
                    .map_err(|e| invalid(key, value, e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn merge_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            if key.trim().is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            self.apply(key, value)?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        self.merge_str(&text)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        config.merge_file(path)?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::VehicleClass;

    #[test]
    fn parses_full_file() {
        let mut c = RunConfig::default();
        c.merge_str(
            "# test\nbin-duration = 600\np0=10\nm_t = 1.01\nq = 2 # inline\nr=3\n\
             percent_denominator = observed\nevaluate_mode = filtered\nhistogram_bins = 12\n\
             noise_fit = moments\npcu.cycle_rickshaw = 1.5\nstart_time = 2021-01-20T00:00:00Z\n",
        )
        .unwrap();
        assert_eq!(c.bin_duration, 600);
        assert_eq!(c.p0, 10.0);
        assert_eq!(c.transition, 1.01);
        assert_eq!(c.process_noise, Some(2.0));
        assert_eq!(c.measurement_noise, Some(3.0));
        assert_eq!(c.percent_denominator, PercentDenominator::Observed);
        assert_eq!(c.evaluate_mode, EvaluateMode::Filtered);
        assert_eq!(c.noise_fit, NoiseFit::Moments);
        assert_eq!(c.histogram_bins, 12);
        assert_eq!(c.pcu_table.factor(VehicleClass::CycleRickshaw), 1.5);
        assert_eq!(c.start_time, Some(1_611_100_800));
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply("colour", "blue"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(
            c.apply("pcu.hovercraft", "1"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(c.apply("bin_duration", "0").is_err());
        assert!(c.apply("bin_duration", "-5").is_err());
        assert!(c.apply("p0", "-1").is_err());
        assert!(c.apply("m_m", "0").is_err());
        assert!(c.apply("q", "nan").is_err());
        assert!(c.apply("histogram_bins", "0").is_err());
        assert!(c.apply("pcu.bus", "0").is_err());
        assert!(c.apply("evaluate_mode", "both").is_err());
        assert!(matches!(
            c.merge_str("just words"),
            Err(ConfigError::Syntax { line: 1 })
        ));
        assert!(matches!(c.merge_str("=3"), Err(ConfigError::Syntax { line: 1 })));
        assert_eq!(c, RunConfig::default());
    }
}
