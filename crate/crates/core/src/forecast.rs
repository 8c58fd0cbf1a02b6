//! Forecasters of the next `Z` steps and the "RUL after `Z` steps" view.
//!
//! Forecast values live in the same units as the window they were computed
//! from (normalized, inside the pipeline); [`Forecast::denormalized`] maps
//! them back to sensor units for display.

use serde::{Deserialize, Serialize};

use crate::dataset::{Instance, Normalizer, WindowGeometry};
use crate::error::{Error, Result};
use crate::math::Matrix;
use crate::models::{Mlp, RulModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastSource {
    Static,
    Neural,
    Xyz,
}

/// A `Z × J` trajectory: row `k` is the `k+1`-th future step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub values: Matrix,
    pub source: ForecastSource,
}

impl Forecast {
    pub fn horizon(&self) -> usize {
        self.values.rows()
    }

    pub fn denormalized(&self, normalizer: &Normalizer) -> Result<Forecast> {
        Ok(Forecast {
            values: normalizer.denormalize_steps(&self.values)?,
            source: self.source,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecasterChoice {
    Static,
    #[default]
    Neural,
}

/// How the static forecaster turns the last `Z` observations into a forecast.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaticMode {
    /// Point reflection through the final observation:
    /// `f[k] = 2·v[N−1] − v[N−1−k]`.
    #[default]
    Reflect,
    /// Time reversal: `f[k] = v[N−k]`.
    Reverse,
}

/// Anything that maps a J×N window to a `Z × J` continuation.
pub trait Forecaster {
    fn name(&self) -> &'static str;
    fn forecast(&self, window: &Matrix) -> Result<Forecast>;
}

#[derive(Debug, Clone, Copy)]
pub struct StaticForecaster {
    pub horizon: usize,
    pub mode: StaticMode,
}

impl Forecaster for StaticForecaster {
    fn name(&self) -> &'static str {
        "static"
    }

    fn forecast(&self, window: &Matrix) -> Result<Forecast> {
        static_forecast(window, self.horizon, self.mode)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NeuralForecaster<'a> {
    pub net: &'a Mlp,
    pub geometry: WindowGeometry,
}

impl Forecaster for NeuralForecaster<'_> {
    fn name(&self) -> &'static str {
        "neural"
    }

    fn forecast(&self, window: &Matrix) -> Result<Forecast> {
        neural_forecast(self.net, &self.geometry, window)
    }
}

pub fn static_forecast(window: &Matrix, horizon: usize, mode: StaticMode) -> Result<Forecast> {
    let (j, n) = window.shape();
    if horizon < 1 || horizon >= n {
        return Err(Error::InvalidGeometry(format!(
            "horizon {horizon} must satisfy 1 <= Z < N = {n}"
        )));
    }
    let values = Matrix::from_fn(horizon, j, |k, f| {
        let k = k + 1;
        let row = window.row(f);
        match mode {
            StaticMode::Reflect => 2.0 * row[n - 1] - row[n - 1 - k],
            StaticMode::Reverse => row[n - k],
        }
    })?;
    Ok(Forecast {
        values,
        source: ForecastSource::Static,
    })
}

pub fn neural_forecast(nf: &Mlp, geometry: &WindowGeometry, window: &Matrix) -> Result<Forecast> {
    geometry.check(window)?;
    if nf.input_dim() != geometry.j * geometry.n || nf.output_dim() != geometry.j * geometry.z {
        return Err(Error::GeometryMismatch(format!(
            "forecaster maps {} → {}, geometry requires {} → {}",
            nf.input_dim(),
            nf.output_dim(),
            geometry.j * geometry.n,
            geometry.j * geometry.z
        )));
    }
    let out = nf.forward(window.as_slice())?;
    Ok(Forecast {
        values: Matrix::new(geometry.z, geometry.j, out)?,
        source: ForecastSource::Neural,
    })
}

/// Drops the oldest `K` steps and appends the `K × J` trajectory. The result
/// has no RUL target.
pub fn slide_window(instance: &Instance, steps: &Matrix) -> Result<Instance> {
    let (j, n) = instance.values.shape();
    let k = steps.rows();
    if steps.cols() != j || k > n {
        return Err(Error::dims(
            format!("K×{j} trajectory with K <= {n}"),
            format!("{}x{}", steps.rows(), steps.cols()),
        ));
    }
    let values = Matrix::from_fn(j, n, |f, t| {
        if t + k < n {
            instance.values.get(f, t + k)
        } else {
            steps.get(t + k - n, f)
        }
    })?;
    Ok(Instance {
        values,
        rul_target: None,
        unit_id: instance.unit_id,
        end_cycle: instance.end_cycle + k as u32,
    })
}

/// PM prediction on the window slid forward by the forecaster's output.
pub fn future_rul(pm: &dyn RulModel, instance: &Instance, forecaster: &dyn Forecaster) -> Result<f64> {
    let forecast = forecaster.forecast(&instance.values)?;
    pm.predict_rul(&slide_window(instance, &forecast.values)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn reflection_hand_example() {
        let w = window(&[&[0.0, 1.0, 4.0, 9.0]]);
        let f = static_forecast(&w, 2, StaticMode::Reflect).unwrap();
        assert_eq!(f.values.column(0), vec![14.0, 17.0]);
    }

    #[test]
    fn constant_stays_constant() {
        let w = window(&[&[3.5; 6], &[-1.0; 6]]);
        for mode in [StaticMode::Reflect, StaticMode::Reverse] {
            let f = static_forecast(&w, 3, mode).unwrap();
            assert!(f.values.column(0).iter().all(|&v| v == 3.5));
            assert!(f.values.column(1).iter().all(|&v| v == -1.0));
        }
    }

    #[test]
    fn reverse_mode_mirrors_in_time() {
        let w = window(&[&[0.0, 1.0, 4.0, 9.0]]);
        let f = static_forecast(&w, 3, StaticMode::Reverse).unwrap();
        assert_eq!(f.values.column(0), vec![9.0, 4.0, 1.0]);
    }

    #[test]
    fn horizon_must_be_shorter_than_window() {
        let w = window(&[&[0.0, 1.0, 4.0]]);
        assert!(static_forecast(&w, 3, StaticMode::Reflect).is_err());
        assert!(static_forecast(&w, 0, StaticMode::Reflect).is_err());
    }

    #[test]
    fn slide_keeps_shape_and_appends() {
        let inst = Instance {
            values: window(&[&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]]),
            rul_target: Some(10.0),
            unit_id: 2,
            end_cycle: 4,
        };
        let steps = window(&[&[40.0, 80.0], &[41.0, 81.0]]);
        let out = slide_window(&inst, &steps).unwrap();
        assert_eq!(out.values.to_rows(), vec![vec![3.0, 4.0, 40.0, 41.0], vec![7.0, 8.0, 80.0, 81.0]]);
        assert_eq!(out.end_cycle, 6);
        assert!(out.is_synthetic());
        assert!(slide_window(&inst, &window(&[&[1.0, 2.0, 3.0]])).is_err());
    }
}
