//! Held-out quality of a trained bundle.

use serde::{Deserialize, Serialize};

use crate::dataset::{Instance, PreparedData};
use crate::error::{Error, Result};
use crate::forecast::{Forecaster, NeuralForecaster, StaticForecaster, StaticMode};
use crate::math::Matrix;
use crate::models::{nf_pairs, ModelBundle, RulModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub test_windows: usize,
    /// Mean absolute RUL error of the predictive network, in cycles.
    pub pm_mae: f64,
    /// The same for a constant prediction of the mean training RUL.
    pub baseline_mae: f64,
    /// `pm_mae / baseline_mae`.
    pub pm_ratio: f64,
    /// Windows whose next `Z` steps are known.
    pub forecast_windows: usize,
    /// Mean absolute error of the neural forecaster (normalized units).
    pub nf_mae: Option<f64>,
    /// The same for the static (point-reflection) forecaster.
    pub sf_mae: Option<f64>,
}

/// Scores the bundle on `data.test`; forecasters are scored on every test
/// window whose continuation is covered by another test window.
pub fn evaluate(bundle: &ModelBundle, data: &PreparedData) -> Result<Evaluation> {
    if data.geometry != bundle.geometry {
        return Err(Error::GeometryMismatch(format!(
            "data windows are {:?}, bundle expects {:?}",
            data.geometry, bundle.geometry
        )));
    }
    if data.test.is_empty() {
        return Err(Error::Empty("no held-out windows".into()));
    }
    let train_targets = data.train.iter().map(Instance::target).collect::<Result<Vec<_>>>()?;
    let mean_target = train_targets.iter().sum::<f64>() / train_targets.len().max(1) as f64;
    let pm = bundle.predictor();
    let (mut pm_err, mut base_err) = (0.0, 0.0);
    for inst in &data.test {
        let y = inst.target()?;
        pm_err += (pm.predict_rul(&inst.values)? - y).abs();
        base_err += (mean_target - y).abs();
    }
    let count = data.test.len() as f64;
    let (pm_mae, baseline_mae) = (pm_err / count, base_err / count);

    let g = bundle.geometry;
    let pairs = nf_pairs(&data.test, &g)?;
    let nf = NeuralForecaster {
        net: &bundle.nf,
        geometry: g,
    };
    let sf = StaticForecaster {
        horizon: g.z,
        mode: StaticMode::Reflect,
    };
    let (mut nf_err, mut sf_err) = (0.0, 0.0);
    for i in 0..pairs.len() {
        let window = Matrix::new(g.j, g.n, pairs.input(i).to_vec())?;
        let truth = pairs.target(i);
        for (forecaster, err) in [(&nf as &dyn Forecaster, &mut nf_err), (&sf, &mut sf_err)] {
            let f = forecaster.forecast(&window)?;
            *err += f.values.as_slice().iter().zip(truth).map(|(a, b)| (a - b).abs()).sum::<f64>();
        }
    }
    let cells = (pairs.len() * g.z * g.j) as f64;
    let per_cell = |e: f64| (!pairs.is_empty()).then(|| e / cells);
    Ok(Evaluation {
        test_windows: data.test.len(),
        pm_mae,
        baseline_mae,
        pm_ratio: pm_mae / baseline_mae,
        forecast_windows: pairs.len(),
        nf_mae: per_cell(nf_err),
        sf_mae: per_cell(sf_err),
    })
}
