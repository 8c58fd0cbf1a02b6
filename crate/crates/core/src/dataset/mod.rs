//! Ingestion of unit/cycle sensor tables, feature selection, windowing and
//! normalization.

mod features;
mod load;
mod normalize;
mod prepare;
pub mod store;
pub mod synthetic;
mod window;

use serde::{Deserialize, Serialize};

pub use features::{pooled_variances, retain_columns, select_features};
pub use load::{load_units, parse_units, Column, Schema, UnitTable};
pub use normalize::{apply_normalizer, fit_normalizer, Normalizer};
pub use prepare::{IngestConfig, PreparedData};
pub use window::{make_windows, Instance, WindowGeometry};

/// One unit's run, cycle by cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSeries {
    pub unit_id: u32,
    /// `1..=len`, strictly consecutive.
    pub cycles: Vec<u32>,
    pub readings: Vec<Vec<f64>>,
}

impl UnitSeries {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn features(&self) -> usize {
        self.readings.first().map_or(0, Vec::len)
    }
}
