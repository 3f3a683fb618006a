//! Seeded generator of classified heterogeneous vehicle counts.
//!
//! Each bin gets a target PCU of `(base_flow + trend * i) * max(1 + cv * e, 0)`
//! with `e` standard normal, which is then split into integer vehicle counts
//! per class following `class_mix` (vehicle shares).
//!
//! Random stream: ChaCha8 (`rand_chacha` 0.9) seeded with
//! `seed_from_u64(seed)`, normals from `rand_distr` 0.5 `StandardNormal`. One
//! normal is drawn per bin, even when `noise_cv` is 0. Both crates are pinned
//! to exact versions so the same seed reproduces the same file.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::series::DEFAULT_BIN_DURATION;
use crate::vehicle::{ClassifiedCount, PcuTable, VehicleClass};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("unknown preset '{0}' (available: {1})")]
    UnknownPreset(String, String),
}

/// 2021-01-20T00:00:00Z
pub const DEFAULT_START_TIME: i64 = 1_611_100_800;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub start_time: i64,
    /// Seconds.
    pub duration: u64,
    pub bin_duration: u64,
    /// PCU per bin at bin 0.
    pub base_flow: f64,
    /// PCU per bin added each bin.
    pub trend: f64,
    pub noise_cv: f64,
    /// Share of vehicles per class; classes not listed get 0.
    pub class_mix: BTreeMap<VehicleClass, f64>,
    pub seed: u64,
}

/// Illustrative rickshaw-heavy mix for a Dhaka arterial.
pub fn default_class_mix() -> BTreeMap<VehicleClass, f64> {
    use VehicleClass::*;
    BTreeMap::from([
        (Bus, 0.06),
        (Truck, 0.02),
        (Cng, 0.14),
        (PrivateCar, 0.20),
        (CommercialVehicle, 0.03),
        (Utility, 0.04),
        (Motorcycle, 0.13),
        (Bicycle, 0.03),
        (CycleRickshaw, 0.35),
    ])
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            start_time: DEFAULT_START_TIME,
            duration: 3 * 3600,
            bin_duration: DEFAULT_BIN_DURATION,
            base_flow: 480.0,
            trend: 6.0,
            noise_cv: 0.15,
            class_mix: default_class_mix(),
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: &str| Err(SynthError::InvalidScenario(msg.to_string()));
        if self.duration == 0 {
            return bad("duration must be > 0");
        }
        if self.bin_duration == 0 {
            return bad("bin_duration must be > 0");
        }
        let fits = i64::try_from(self.duration)
            .ok()
            .and_then(|d| self.start_time.checked_add(d))
            .is_some();
        if !fits {
            return bad("start_time + duration overflows epoch seconds");
        }
        if self.bins() > 1_000_000 {
            return bad("duration / bin_duration exceeds 1e6 bins");
        }
        if !(self.base_flow.is_finite() && self.base_flow > 0.0) {
            return bad("base_flow must be finite and > 0");
        }
        if !self.trend.is_finite() {
            return bad("trend must be finite");
        }
        if !(self.noise_cv.is_finite() && self.noise_cv >= 0.0) {
            return bad("noise_cv must be finite and >= 0");
        }
        if self.class_mix.values().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("class_mix proportions must be finite and >= 0");
        }
        let total: f64 = self.class_mix.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SynthError::InvalidScenario(format!(
                "class_mix proportions must sum to 1, got {total}"
            )));
        }
        Ok(())
    }

    /// Number of bins covered by `duration`, counting a trailing partial bin.
    pub fn bins(&self) -> u64 {
        self.duration.div_ceil(self.bin_duration.max(1))
    }

    fn mix_array(&self) -> [f64; 9] {
        VehicleClass::ALL.map(|c| self.class_mix.get(&c).copied().unwrap_or(0.0))
    }
}

/// Named scenarios. All seeds are fixed.
pub fn presets() -> Vec<(&'static str, Scenario)> {
    vec![
        (
            "paper-like",
            // Mean near 490 PCU/bin over 3 h, range roughly 225-800, rising.
            Scenario {
                base_flow: 250.0,
                trend: 14.0,
                noise_cv: 0.10,
                seed: 20_210_120,
                ..Scenario::default()
            },
        ),
        (
            "steady",
            Scenario {
                trend: 0.0,
                seed: 7,
                ..Scenario::default()
            },
        ),
        (
            "volatile",
            Scenario {
                noise_cv: 0.35,
                seed: 35,
                ..Scenario::default()
            },
        ),
    ]
}

pub fn preset(name: &str) -> Result<Scenario, SynthError> {
    let all = presets();
    let names = all.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ");
    all.into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
        .ok_or_else(|| SynthError::UnknownPreset(name.to_string(), names))
}

/// Generates counts with the default PCU table.
pub fn generate(scenario: &Scenario) -> Result<Vec<ClassifiedCount>, SynthError> {
    generate_with(scenario, &PcuTable::default())
}

/// One record per class per bin (zero counts included), stamped at the bin
/// start.
pub fn generate_with(scenario: &Scenario, table: &PcuTable) -> Result<Vec<ClassifiedCount>, SynthError> {
    scenario.validate()?;
    let mix = scenario.mix_array();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let bins = scenario.bins();
    let mut out = Vec::with_capacity(bins as usize * VehicleClass::ALL.len());
    for i in 0..bins {
        let level = (scenario.base_flow + scenario.trend * i as f64).max(0.0);
        let e: f64 = StandardNormal.sample(&mut rng);
        let target = level * (1.0 + scenario.noise_cv * e).max(0.0);
        let counts = apportion(target, &mix, table);
        let t = scenario.start_time + (i * scenario.bin_duration) as i64;
        out.extend(
            VehicleClass::ALL
                .iter()
                .zip(counts)
                .map(|(&class, n)| ClassifiedCount::new(t, class, n)),
        );
    }
    Ok(out)
}

/// Splits `target_pcu` into integer vehicle counts per class.
///
/// Ideal (fractional) counts follow the vehicle shares in `mix`. Counts are
/// floored, then classes receive one extra vehicle in order of descending
/// remainder as long as that brings the PCU total closer to the target. The
/// result is within half the largest factor of `target_pcu`.
pub fn apportion(target_pcu: f64, mix: &[f64; 9], table: &PcuTable) -> [u64; 9] {
    let factors = VehicleClass::ALL.map(|c| table.factor(c));
    let pcu_per_vehicle: f64 = mix.iter().zip(&factors).map(|(m, f)| m * f).sum();
    let mut counts = [0u64; 9];
    if target_pcu.is_nan() || target_pcu <= 0.0 || pcu_per_vehicle.is_nan() || pcu_per_vehicle <= 0.0 {
        return counts;
    }
    let vehicles = target_pcu / pcu_per_vehicle;
    let mut remainders = Vec::with_capacity(9);
    let mut deficit = target_pcu;
    for (i, &share) in mix.iter().enumerate() {
        if share <= 0.0 {
            continue;
        }
        let ideal = vehicles * share;
        let whole = ideal.floor();
        counts[i] = whole as u64;
        deficit -= whole * factors[i];
        remainders.push((ideal - whole, i));
    }
    // stable sort keeps class order on ties
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (_, i) in remainders {
        if deficit > factors[i] / 2.0 {
            counts[i] += 1;
            deficit -= factors[i];
        }
    }
    counts
}
