//! Default noise variances for a series when none are configured.

use serde::Serialize;

use super::KalmanError;

/// Variance assigned to both `q` and `r` for a constant series.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Relative floor on `q`, as a fraction of the series variance.
const PROCESS_FLOOR_FRACTION: f64 = 1e-6;

/// Search range for the signal-to-noise ratio `q / r` (log10).
const LOG_RATIO_MIN: f64 = -4.0;
const LOG_RATIO_MAX: f64 = 4.0;
const GRID_POINTS: usize = 161;
const REFINE_ITERATIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseEstimate {
    pub process_noise: f64,
    pub measurement_noise: f64,
    pub transition: f64,
    /// Set when the series had zero variance and the floor was used.
    pub zero_variance: bool,
}

impl NoiseEstimate {
    fn floor(transition: f64) -> Self {
        Self {
            process_noise: NOISE_FLOOR,
            measurement_noise: NOISE_FLOOR,
            transition,
            zero_variance: true,
        }
    }
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

fn check_len(values: &[f64]) -> Result<(), KalmanError> {
    if values.len() < 3 {
        return Err(KalmanError::SeriesTooShort {
            len: values.len(),
            min: 3,
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(KalmanError::NonFiniteInput);
    }
    Ok(())
}

/// Method-of-moments random-walk defaults from first differences `d`:
/// `r = Var(d) / 2`, `q = max(Var(d) - 2r, 1e-6 * Var(values))`, `a = 1`.
///
/// Because `r` absorbs all of `Var(d)`, `q` always lands on its floor and
/// the filter behaves like a slowly adapting mean. [`fit_noise`] is the
/// better default for trending data.
pub fn estimate_noise(values: &[f64]) -> Result<NoiseEstimate, KalmanError> {
    check_len(values)?;
    let var_values = sample_variance(values);
    if var_values == 0.0 {
        return Ok(NoiseEstimate::floor(1.0));
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let var_diff = sample_variance(&diffs);
    let r = var_diff / 2.0;
    let q = (var_diff - 2.0 * r).max(PROCESS_FLOOR_FRACTION * var_values);
    Ok(NoiseEstimate {
        process_noise: q,
        measurement_noise: r,
        transition: 1.0,
        zero_variance: false,
    })
}

/// Maximum-likelihood `q` and `r` for fixed transition and measurement
/// factors.
///
/// Scale is concentrated out of the innovations likelihood so only the ratio
/// `q / r` is searched: a log-spaced grid over `[1e-4, 1e4]`, then a
/// golden-section refinement around the best grid point. Deterministic given
/// the input.
pub fn fit_noise(values: &[f64], transition: f64, measurement: f64) -> Result<NoiseEstimate, KalmanError> {
    check_len(values)?;
    if !transition.is_finite() || !measurement.is_finite() || measurement == 0.0 {
        return Err(KalmanError::InvalidParams(
            "transition and measurement factors must be finite, measurement non-zero".into(),
        ));
    }
    if sample_variance(values) == 0.0 {
        return Ok(NoiseEstimate::floor(transition));
    }

    let profile = |log_ratio: f64| concentrated(values, 10f64.powf(log_ratio), transition, measurement);

    let step = (LOG_RATIO_MAX - LOG_RATIO_MIN) / (GRID_POINTS - 1) as f64;
    let grid = |i: usize| LOG_RATIO_MIN + step * i as f64;
    let mut best = 0;
    let mut best_nll = f64::INFINITY;
    for i in 0..GRID_POINTS {
        let nll = profile(grid(i)).0;
        if nll < best_nll {
            best_nll = nll;
            best = i;
        }
    }
    if !best_nll.is_finite() {
        return Ok(NoiseEstimate::floor(transition));
    }

    let mut lo = grid(best.saturating_sub(1));
    let mut hi = grid((best + 1).min(GRID_POINTS - 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (profile(c).0, profile(d).0);
    for _ in 0..REFINE_ITERATIONS {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = profile(c).0;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = profile(d).0;
        }
    }
    let mut log_ratio = (lo + hi) / 2.0;
    let (mut nll, mut scale) = profile(log_ratio);
    if nll.is_nan() || nll > best_nll {
        log_ratio = grid(best);
        (nll, scale) = profile(log_ratio);
    }
    if !nll.is_finite() || scale <= 0.0 {
        return Ok(NoiseEstimate::floor(transition));
    }
    Ok(NoiseEstimate {
        process_noise: 10f64.powf(log_ratio) * scale,
        measurement_noise: scale,
        transition,
        zero_variance: false,
    })
}

/// Runs the filter with `r = 1`, `q = ratio` and returns
/// `(n ln s² + Σ ln f, s²)` where `s² = Σ v²/f / n` is the concentrated
/// measurement variance, `v` the innovations and `f` their unit variances.
fn concentrated(values: &[f64], ratio: f64, a: f64, h: f64) -> (f64, f64) {
    // Diffuse prior conditioned on the first value leaves variance r / h².
    let mut x = values[0] / h;
    let mut p = 1.0 / (h * h);
    let mut weighted = 0.0;
    let mut log_det = 0.0;
    for &z in &values[1..] {
        let prior_x = a * x;
        let prior_p = a * a * p + ratio;
        let f = h * h * prior_p + 1.0;
        let v = z - h * prior_x;
        weighted += v * v / f;
        log_det += f.ln();
        let k = prior_p * h / f;
        x = prior_x + k * v;
        p = (1.0 - k * h).max(0.0) * prior_p;
    }
    let n = (values.len() - 1) as f64;
    let scale = weighted / n;
    if scale <= 0.0 || !scale.is_finite() {
        return (f64::INFINITY, 0.0);
    }
    (n * scale.ln() + log_det, scale)
}
