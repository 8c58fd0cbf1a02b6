use serde::{Deserialize, Serialize};

use super::{Explanation, Neighborhood};
use crate::dataset::Instance;
use crate::error::{Error, Result};
use crate::models::RulModel;

/// Surrogate-vs-model agreement over a neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    pub mae: f64,
    /// `None` when the model's outputs have zero weighted variance.
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truthfulness {
    /// `None` when every importance is zero.
    pub score: Option<f64>,
    pub truthful: usize,
    pub evaluated: usize,
    pub probes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Shift applied to all steps of a feature, in normalized units.
    pub delta: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { delta: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub fidelity_mae: f64,
    pub fidelity_r2: Option<f64>,
    pub truthfulness: Option<f64>,
    pub probe_count: usize,
}

/// Weighted MAE and R² of the surrogate against the model on the
/// neighborhood it was fitted on (center included, weight 1).
pub fn evaluate_fidelity(pm: &dyn RulModel, explanation: &Explanation, nbhd: &Neighborhood) -> Result<Fidelity> {
    let weights = nbhd.sample_weights();
    let total: f64 = weights.iter().sum();
    let mut pairs = Vec::with_capacity(weights.len());
    for m in nbhd.samples() {
        pairs.push((pm.predict_rul(m)?, explanation.surrogate_predict(m)));
    }
    let mae = pairs
        .iter()
        .zip(&weights)
        .map(|((y, s), w)| w * (y - s).abs())
        .sum::<f64>()
        / total;
    let y_mean = pairs.iter().zip(&weights).map(|((y, _), w)| w * y).sum::<f64>() / total;
    let sst: f64 = pairs.iter().zip(&weights).map(|((y, _), w)| w * (y - y_mean).powi(2)).sum();
    let sse: f64 = pairs.iter().zip(&weights).map(|((y, s), w)| w * (y - s).powi(2)).sum();
    let r2 = (sst > 1e-300).then(|| 1.0 - sse / sst);
    Ok(Fidelity { mae, r2 })
}

/// Fraction of features (with non-zero importance) for which shifting the
/// whole feature by `+delta` moves the prediction in the direction of
/// `sign(s[j])` and `-delta` moves it the opposite way.
pub fn evaluate_truthfulness(
    pm: &dyn RulModel,
    instance: &Instance,
    explanation: &Explanation,
    probe: &ProbeConfig,
) -> Result<Truthfulness> {
    if !(probe.delta > 0.0) {
        return Err(Error::InvalidArgument(format!("probe delta must be > 0, got {}", probe.delta)));
    }
    let base = pm.predict_rul(&instance.values)?;
    let mut truthful = 0;
    let mut evaluated = 0;
    for (f, &s) in explanation.s.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        evaluated += 1;
        let shifted = |d: f64| -> Result<f64> {
            let mut m = instance.values.clone();
            for t in 0..m.cols() {
                m.set(f, t, m.get(f, t) + d);
            }
            pm.predict_rul(&m)
        };
        let up = sign(shifted(probe.delta)? - base);
        let down = sign(shifted(-probe.delta)? - base);
        let expected = sign(s);
        if up == expected && down == -expected {
            truthful += 1;
        }
    }
    Ok(Truthfulness {
        score: (evaluated > 0).then(|| truthful as f64 / evaluated as f64),
        truthful,
        evaluated,
        probes: 2 * evaluated,
    })
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}
