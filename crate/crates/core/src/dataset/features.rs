use super::UnitSeries;
use crate::error::{Error, Result};

/// Pooled (population) variance of every sensor over all units and cycles.
pub fn pooled_variances(units: &[UnitSeries]) -> Vec<f64> {
    let j = units.first().map_or(0, UnitSeries::features);
    let mut sum = vec![0.0; j];
    let mut count = 0usize;
    for r in units.iter().flat_map(|u| &u.readings) {
        sum.iter_mut().zip(r).for_each(|(s, v)| *s += v);
        count += 1;
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
    let mut var = vec![0.0; j];
    for r in units.iter().flat_map(|u| &u.readings) {
        for ((acc, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *acc += (v - m) * (v - m);
        }
    }
    var.iter().map(|v| v / count as f64).collect()
}

/// Drops sensors whose pooled variance is below `variance_threshold`.
/// Returns the reduced units and the retained column indices, in order.
pub fn select_features(units: &[UnitSeries], variance_threshold: f64) -> Result<(Vec<UnitSeries>, Vec<usize>)> {
    if units.is_empty() {
        return Err(Error::Empty("no units to select features from".into()));
    }
    let retained: Vec<usize> = pooled_variances(units)
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= variance_threshold)
        .map(|(i, _)| i)
        .collect();
    if retained.is_empty() {
        return Err(Error::AllFeaturesDropped {
            threshold: variance_threshold,
        });
    }
    Ok((retain_columns(units, &retained), retained))
}

/// Projects every unit onto the given sensor columns.
pub fn retain_columns(units: &[UnitSeries], retained: &[usize]) -> Vec<UnitSeries> {
    units
        .iter()
        .map(|u| UnitSeries {
            unit_id: u.unit_id,
            cycles: u.cycles.clone(),
            readings: u.readings.iter().map(|r| retained.iter().map(|&c| r[c]).collect()).collect(),
        })
        .collect()
}
