use serde::{Deserialize, Serialize};

use crate::dataset::{Instance, Normalizer, WindowGeometry};
use crate::error::{Error, Result};
use crate::forecast::{slide_window, Forecaster};
use crate::math::Matrix;
use crate::models::{prefix_steps, Mlp, RulModel};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrescribeMode {
    /// Condition on steps `0..X`, as in training.
    WithinWindow,
    /// Condition on the most recent `X` steps to prescribe the next `Z`.
    #[default]
    Future,
}

/// The three predictions shown side by side, with both trajectories in
/// sensor units (`Z × J`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescriptionReport {
    pub original_rul: f64,
    /// After sliding by the forecaster's trajectory.
    pub future_rul: f64,
    /// After sliding by the prescribed trajectory.
    pub mod_rul: f64,
    pub desired_target: f64,
    pub prescribed: Matrix,
    pub forecast: Matrix,
    pub forecaster: String,
    /// `mod_rul − future_rul`.
    pub gain: f64,
}

/// Suggested next `Z` steps (normalized, `Z × J`) for reaching
/// `desired_target`.
pub fn xyz_prescribe(
    xyz: &Mlp,
    geometry: &WindowGeometry,
    rul_scale: f64,
    instance: &Instance,
    desired_target: f64,
    mode: PrescribeMode,
) -> Result<Matrix> {
    geometry.check(&instance.values)?;
    if !(desired_target >= 0.0 && desired_target.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "desired target must be finite and >= 0, got {desired_target}"
        )));
    }
    let x = geometry.x();
    if xyz.input_dim() != geometry.j * x + 1 || xyz.output_dim() != geometry.j * geometry.z {
        return Err(Error::GeometryMismatch(format!(
            "conditional model maps {} → {}, geometry requires {} → {}",
            xyz.input_dim(),
            xyz.output_dim(),
            geometry.j * x + 1,
            geometry.j * geometry.z
        )));
    }
    let start = match mode {
        PrescribeMode::WithinWindow => 0,
        PrescribeMode::Future => geometry.z,
    };
    let mut input = vec![0.0; geometry.j * x + 1];
    prefix_steps(&instance.values, start, x, &mut input[..geometry.j * x]);
    input[geometry.j * x] = desired_target / rul_scale;
    Matrix::new(geometry.z, geometry.j, xyz.forward(&input)?)
}

/// Original, forecaster-future and prescribed ("MOD") predictions.
pub fn compare_prescription(
    pm: &dyn RulModel,
    normalizer: &Normalizer,
    instance: &Instance,
    suggestion: &Matrix,
    forecaster: &dyn Forecaster,
    desired_target: f64,
) -> Result<PrescriptionReport> {
    let original_rul = pm.predict_rul(&instance.values)?;
    let forecast = forecaster.forecast(&instance.values)?;
    if forecast.values.shape() != suggestion.shape() {
        return Err(Error::dims(
            format!("{:?} suggestion", forecast.values.shape()),
            format!("{:?}", suggestion.shape()),
        ));
    }
    let future_rul = pm.predict_rul(&slide_window(instance, &forecast.values)?.values)?;
    let mod_rul = pm.predict_rul(&slide_window(instance, suggestion)?.values)?;
    Ok(PrescriptionReport {
        original_rul,
        future_rul,
        mod_rul,
        desired_target,
        prescribed: normalizer.denormalize_steps(suggestion)?,
        forecast: normalizer.denormalize_steps(&forecast.values)?,
        forecaster: forecaster.name().to_string(),
        gain: mod_rul - future_rul,
    })
}
