//! Scalar linear-Gaussian Kalman filter.
//!
//! State model: `x[t+1] = a * x[t] + w[t]`, `w ~ N(0, q)`
//! Measurement model: `z[t] = h * x[t] + v[t]`, `v ~ N(0, r)`
//!
//! where `a` is the transition factor and `h` the measurement factor. Each
//! observation runs [`predict`] then [`update`]; the update amends the prior
//! estimate by the gain times the innovation `z - h * x_prior`.

mod noise;

pub use noise::{estimate_noise, fit_noise, NoiseEstimate, NOISE_FLOOR};

use serde::Serialize;
use thiserror::Error;

use crate::series::FlowSeries;

/// Initial estimate variance used when none is configured (PCU²).
pub const DEFAULT_P0: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KalmanError {
    #[error("invalid filter parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite value in filter input or state")]
    NonFiniteInput,
    #[error("gain denominator is zero (prior variance and measurement noise both 0)")]
    DegenerateGain,
    #[error("series has {len} values, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
}

/// Transition, measurement and noise variances of the state-space model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterParams {
    transition: f64,
    measurement: f64,
    process_noise: f64,
    measurement_noise: f64,
}

impl FilterParams {
    /// Requires finite values, both variances >= 0 with a positive sum, and a
    /// non-zero measurement factor.
    pub fn new(
        transition: f64,
        measurement: f64,
        process_noise: f64,
        measurement_noise: f64,
    ) -> Result<Self, KalmanError> {
        let all_finite = [transition, measurement, process_noise, measurement_noise]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(KalmanError::InvalidParams("all parameters must be finite".into()));
        }
        if process_noise < 0.0 || measurement_noise < 0.0 {
            return Err(KalmanError::InvalidParams("noise variances must be >= 0".into()));
        }
        if process_noise + measurement_noise <= 0.0 {
            return Err(KalmanError::InvalidParams(
                "process and measurement noise cannot both be 0".into(),
            ));
        }
        if measurement == 0.0 {
            return Err(KalmanError::InvalidParams("measurement factor must be non-zero".into()));
        }
        Ok(Self {
            transition,
            measurement,
            process_noise,
            measurement_noise,
        })
    }

    /// Random walk observed directly (`a = h = 1`).
    pub fn random_walk(process_noise: f64, measurement_noise: f64) -> Result<Self, KalmanError> {
        Self::new(1.0, 1.0, process_noise, measurement_noise)
    }

    pub fn transition(&self) -> f64 {
        self.transition
    }

    pub fn measurement(&self) -> f64 {
        self.measurement
    }

    pub fn process_noise(&self) -> f64 {
        self.process_noise
    }

    pub fn measurement_noise(&self) -> f64 {
        self.measurement_noise
    }
}

/// Estimate and its variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterState {
    pub estimate: f64,
    pub variance: f64,
}

impl FilterState {
    pub fn new(estimate: f64, variance: f64) -> Result<Self, KalmanError> {
        let state = Self { estimate, variance };
        state.check()?;
        Ok(state)
    }

    fn check(&self) -> Result<(), KalmanError> {
        if self.estimate.is_finite() && self.variance.is_finite() && self.variance >= 0.0 {
            Ok(())
        } else {
            Err(KalmanError::NonFiniteInput)
        }
    }
}

/// One predict/update cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterStep {
    pub prior: FilterState,
    pub gain: f64,
    pub innovation: f64,
    pub posterior: FilterState,
    /// Predicted measurement `h * prior.estimate`, made before seeing this
    /// step's observation.
    pub forecast: f64,
}

/// Result of filtering a series: the state after absorbing the first
/// observation, then one step per remaining observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterTrace {
    pub params: FilterParams,
    pub initial_state: FilterState,
    pub steps: Vec<FilterStep>,
}

impl FilterTrace {
    /// One-step-ahead forecasts for observations `1..n`.
    pub fn forecasts(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.forecast).collect()
    }

    /// Filtered values in measurement units for observations `1..n`.
    pub fn filtered(&self) -> Vec<f64> {
        self.steps
            .iter()
            .map(|s| self.params.measurement * s.posterior.estimate)
            .collect()
    }

    pub fn final_state(&self) -> FilterState {
        self.steps.last().map_or(self.initial_state, |s| s.posterior)
    }
}

pub fn init_state(first_observation: f64, params: &FilterParams, p0: f64) -> Result<FilterState, KalmanError> {
    if !first_observation.is_finite() || !p0.is_finite() || p0 < 0.0 {
        return Err(KalmanError::NonFiniteInput);
    }
    FilterState::new(first_observation / params.measurement, p0)
}

pub fn predict(state: &FilterState, params: &FilterParams) -> Result<FilterState, KalmanError> {
    state.check()?;
    let a = params.transition;
    FilterState::new(a * state.estimate, a * a * state.variance + params.process_noise)
}

/// Kalman gain `p h / (h² p + r)` for a prior with variance `p`.
pub fn gain(prior: &FilterState, params: &FilterParams) -> Result<f64, KalmanError> {
    let h = params.measurement;
    let denom = h * h * prior.variance + params.measurement_noise;
    if denom == 0.0 {
        return Err(KalmanError::DegenerateGain);
    }
    if !denom.is_finite() {
        return Err(KalmanError::NonFiniteInput);
    }
    Ok(prior.variance * h / denom)
}

/// Absorbs `measurement` into `prior`.
pub fn update(prior: &FilterState, measurement: f64, params: &FilterParams) -> Result<FilterStep, KalmanError> {
    prior.check()?;
    if !measurement.is_finite() {
        return Err(KalmanError::NonFiniteInput);
    }
    let h = params.measurement;
    let k = gain(prior, params)?;
    let forecast = h * prior.estimate;
    let innovation = measurement - forecast;
    // 1 - k h, written as r / (h² p + r) to avoid cancellation when p >> r.
    let retained = (params.measurement_noise / (h * h * prior.variance + params.measurement_noise)).clamp(0.0, 1.0);
    let posterior = FilterState::new(prior.estimate + k * innovation, retained * prior.variance)?;
    Ok(FilterStep {
        prior: *prior,
        gain: k,
        innovation,
        posterior,
        forecast,
    })
}

/// Filters a whole series.
///
/// The filter starts from [`init_state`] on the first value and absorbs that
/// value once (a zero-innovation update) so a diffuse `p0` collapses to the
/// measurement noise. Every later value gets a predict/update step. Forecasts
/// are causal: step `i` sees observations `0..=i` only through its prior.
pub fn filter_series(series: &FlowSeries, params: &FilterParams, p0: f64) -> Result<FilterTrace, KalmanError> {
    filter_values(series.values(), params, p0)
}

/// [`filter_series`] over a bare slice.
pub fn filter_values(values: &[f64], params: &FilterParams, p0: f64) -> Result<FilterTrace, KalmanError> {
    if values.len() < 2 {
        return Err(KalmanError::SeriesTooShort {
            len: values.len(),
            min: 2,
        });
    }
    let seed = init_state(values[0], params, p0)?;
    let initial_state = match gain(&seed, params) {
        Ok(_) => update(&seed, values[0], params)?.posterior,
        // p0 = 0 and r = 0: the seed is already exact.
        Err(KalmanError::DegenerateGain) => seed,
        Err(e) => return Err(e),
    };

    let mut steps = Vec::with_capacity(values.len() - 1);
    let mut state = initial_state;
    for &z in &values[1..] {
        let prior = predict(&state, params)?;
        let step = update(&prior, z, params)?;
        state = step.posterior;
        steps.push(step);
    }
    Ok(FilterTrace {
        params: *params,
        initial_state,
        steps,
    })
}

/// Point forecasts `h * a^k * x` for `k = 1..=horizon`.
pub fn forecast_next(state: &FilterState, params: &FilterParams, horizon: usize) -> Vec<f64> {
    let mut x = state.estimate;
    (0..horizon)
        .map(|_| {
            x *= params.transition;
            params.measurement * x
        })
        .collect()
}
