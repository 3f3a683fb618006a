//! Heterogeneous vehicle taxonomy and Passenger Car Unit conversion.
//!
//! The default factors follow the RHD (Bangladesh, 2005) geometric design
//! guideline. A [`PcuTable`] can be overridden per class to model other
//! jurisdictions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PcuError {
    #[error("unknown vehicle class '{0}'")]
    UnknownVehicleClass(String),
    #[error("negative count {count} for {class}")]
    NegativeCount { class: VehicleClass, count: i64 },
    #[error("PCU factor for {class} must be finite and > 0, got {factor}")]
    InvalidFactor { class: VehicleClass, factor: f64 },
}

/// The nine vehicle classes of the RHD-2005 PCU guideline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VehicleClass {
    Bus,
    Truck,
    Cng,
    PrivateCar,
    CommercialVehicle,
    Utility,
    Motorcycle,
    Bicycle,
    CycleRickshaw,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 9] = [
        VehicleClass::Bus,
        VehicleClass::Truck,
        VehicleClass::Cng,
        VehicleClass::PrivateCar,
        VehicleClass::CommercialVehicle,
        VehicleClass::Utility,
        VehicleClass::Motorcycle,
        VehicleClass::Bicycle,
        VehicleClass::CycleRickshaw,
    ];

    /// Canonical label, as written in CSV files.
    pub fn label(self) -> &'static str {
        match self {
            VehicleClass::Bus => "Bus",
            VehicleClass::Truck => "Truck",
            VehicleClass::Cng => "CNG",
            VehicleClass::PrivateCar => "Private Car",
            VehicleClass::CommercialVehicle => "Commercial Vehicle",
            VehicleClass::Utility => "Utility",
            VehicleClass::Motorcycle => "Motorcycle",
            VehicleClass::Bicycle => "Bicycle",
            VehicleClass::CycleRickshaw => "Cycle Rickshaw",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parses a vehicle class label.
///
/// Matching ignores case, spaces, underscores and hyphens, so `"Private Car"`,
/// `"private_car"` and `"PrivateCar"` are all accepted. Besides the nine
/// canonical labels, the fixed aliases are:
///
/// | alias      | class            |
/// |------------|------------------|
/// | `car`      | `PrivateCar`     |
/// | `rickshaw` | `CycleRickshaw`  |
/// | `cng`      | `Cng`            |
///
/// Anything else is an error; unknown rows are never skipped.
pub fn parse_vehicle_class(label: &str) -> Result<VehicleClass, PcuError> {
    let key: String = label
        .trim()
        .chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-' | '\t'))
        .flat_map(char::to_lowercase)
        .collect();
    let class = match key.as_str() {
        "bus" => VehicleClass::Bus,
        "truck" => VehicleClass::Truck,
        "cng" => VehicleClass::Cng,
        "privatecar" | "car" => VehicleClass::PrivateCar,
        "commercialvehicle" => VehicleClass::CommercialVehicle,
        "utility" => VehicleClass::Utility,
        "motorcycle" => VehicleClass::Motorcycle,
        "bicycle" => VehicleClass::Bicycle,
        "cyclerickshaw" | "rickshaw" => VehicleClass::CycleRickshaw,
        _ => return Err(PcuError::UnknownVehicleClass(label.to_string())),
    };
    Ok(class)
}

impl FromStr for VehicleClass {
    type Err = PcuError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_vehicle_class(s)
    }
}

/// PCU factor per vehicle class. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PcuTable {
    factors: [f64; 9],
}

impl Default for PcuTable {
    fn default() -> Self {
        Self::rhd_2005()
    }
}

impl PcuTable {
    /// RHD-2005 guideline factors.
    pub fn rhd_2005() -> Self {
        Self {
            factors: [3.0, 3.0, 0.75, 1.0, 1.0, 1.0, 0.75, 0.5, 2.0],
        }
    }

    /// Builds a table from a factor per class, in [`VehicleClass::ALL`] order.
    pub fn new(factors: [f64; 9]) -> Result<Self, PcuError> {
        for (class, &factor) in VehicleClass::ALL.iter().zip(factors.iter()) {
            check_factor(*class, factor)?;
        }
        Ok(Self { factors })
    }

    /// Returns a copy of this table with one class overridden.
    pub fn with_factor(&self, class: VehicleClass, factor: f64) -> Result<Self, PcuError> {
        check_factor(class, factor)?;
        let mut factors = self.factors;
        factors[class.index()] = factor;
        Ok(Self { factors })
    }

    pub fn factor(&self, class: VehicleClass) -> f64 {
        self.factors[class.index()]
    }

    pub fn max_factor(&self) -> f64 {
        self.factors.iter().copied().fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VehicleClass, f64)> + '_ {
        VehicleClass::ALL.iter().map(move |&c| (c, self.factor(c)))
    }

    /// Total PCU of a set of classified counts. Repeated classes are summed.
    pub fn to_pcu<I>(&self, counts: I) -> Result<f64, PcuError>
    where
        I: IntoIterator<Item = (VehicleClass, i64)>,
    {
        let mut per_class = [0i64; 9];
        for (class, count) in counts {
            if count < 0 {
                return Err(PcuError::NegativeCount { class, count });
            }
            per_class[class.index()] = per_class[class.index()].saturating_add(count);
        }
        Ok(per_class
            .iter()
            .zip(self.factors.iter())
            .map(|(&n, &f)| n as f64 * f)
            .sum())
    }
}

fn check_factor(class: VehicleClass, factor: f64) -> Result<(), PcuError> {
    if factor.is_finite() && factor > 0.0 {
        Ok(())
    } else {
        Err(PcuError::InvalidFactor { class, factor })
    }
}

/// Free-function form of [`PcuTable::factor`].
pub fn pcu_factor(table: &PcuTable, class: VehicleClass) -> f64 {
    table.factor(class)
}

/// Free-function form of [`PcuTable::to_pcu`].
pub fn to_pcu<I>(table: &PcuTable, counts: I) -> Result<f64, PcuError>
where
    I: IntoIterator<Item = (VehicleClass, i64)>,
{
    table.to_pcu(counts)
}

/// One row of a classified count: `count` vehicles of `vehicle_class`
/// observed at `timestamp` (epoch seconds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedCount {
    pub timestamp: i64,
    pub vehicle_class: VehicleClass,
    pub count: u64,
}

impl ClassifiedCount {
    pub fn new(timestamp: i64, vehicle_class: VehicleClass, count: u64) -> Self {
        Self {
            timestamp,
            vehicle_class,
            count,
        }
    }

    pub fn pcu(&self, table: &PcuTable) -> f64 {
        self.count as f64 * table.factor(self.vehicle_class)
    }
}
