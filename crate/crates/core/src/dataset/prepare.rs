use serde::{Deserialize, Serialize};

use super::{fit_normalizer, make_windows, retain_columns, select_features, Instance, Normalizer, UnitTable, WindowGeometry};
use crate::error::{Error, Result};
use crate::math::Rng;

/// How raw units become train/test windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub window: usize,
    pub horizon: usize,
    pub train_stride: usize,
    pub eval_stride: usize,
    pub variance_threshold: f64,
    /// Fraction of units held out for evaluation.
    pub test_fraction: f64,
    pub split_seed: u64,
    pub rul_cap: Option<f64>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            window: 50,
            horizon: 5,
            train_stride: 1,
            eval_stride: 1,
            variance_threshold: 1e-8,
            test_fraction: 0.25,
            split_seed: 7,
            rul_cap: None,
        }
    }
}

/// Normalized train/test windows with everything needed to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub geometry: WindowGeometry,
    pub sensor_names: Vec<String>,
    /// Indices into the original sensor columns.
    pub retained: Vec<usize>,
    pub normalizer: Normalizer,
    pub config: IngestConfig,
    pub train: Vec<Instance>,
    pub test: Vec<Instance>,
}

impl PreparedData {
    /// Selects features, splits units, windows them and fits the normalizer
    /// on the training split.
    pub fn from_table(table: &UnitTable, config: &IngestConfig) -> Result<Self> {
        let (_, retained) = select_features(&table.units, config.variance_threshold)?;
        Self::build(table, config, retained, None)
    }

    /// Re-ingests with a frozen feature selection and normalizer, as stored
    /// alongside trained models.
    pub fn with_frozen(
        table: &UnitTable,
        config: &IngestConfig,
        retained: &[usize],
        normalizer: &Normalizer,
    ) -> Result<Self> {
        if let Some(&bad) = retained.iter().find(|&&c| c >= table.features()) {
            return Err(Error::MissingColumn(format!("retained sensor #{bad}")));
        }
        Self::build(table, config, retained.to_vec(), Some(normalizer.clone()))
    }

    fn build(
        table: &UnitTable,
        config: &IngestConfig,
        retained: Vec<usize>,
        normalizer: Option<Normalizer>,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&config.test_fraction) {
            return Err(Error::InvalidArgument(format!(
                "test fraction must be in [0, 1), got {}",
                config.test_fraction
            )));
        }
        let geometry = WindowGeometry::new(config.window, retained.len(), config.horizon)?;
        let units = retain_columns(&table.units, &retained);

        let mut order: Vec<usize> = (0..units.len()).collect();
        Rng::new(config.split_seed).shuffle(&mut order);
        let n_test = (config.test_fraction * units.len() as f64).round() as usize;
        let mut is_test = vec![false; units.len()];
        order.iter().take(n_test).for_each(|&i| is_test[i] = true);

        let mut train_raw = Vec::new();
        let mut test_raw = Vec::new();
        for (unit, test) in units.iter().zip(&is_test) {
            if *test {
                test_raw.extend(make_windows(unit, &geometry, config.eval_stride, config.rul_cap)?);
            } else {
                train_raw.extend(make_windows(unit, &geometry, config.train_stride, config.rul_cap)?);
            }
        }
        if train_raw.is_empty() {
            return Err(Error::Empty(format!(
                "no training windows of length {} (units too short?)",
                geometry.n
            )));
        }
        let normalizer = match normalizer {
            Some(n) => n,
            None => fit_normalizer(&train_raw)?,
        };
        let train = train_raw.iter().map(|i| normalizer.apply(i)).collect::<Result<_>>()?;
        let test = test_raw.iter().map(|i| normalizer.apply(i)).collect::<Result<_>>()?;
        Ok(PreparedData {
            geometry,
            sensor_names: retained.iter().map(|&c| table.sensor_names[c].clone()).collect(),
            retained,
            normalizer,
            config: config.clone(),
            train,
            test,
        })
    }
}
