use crate::dataset::Instance;
use crate::error::{Error, Result};
use crate::math::Matrix;

use super::Mlp;

/// A black-box RUL regressor over normalized J×N windows.
pub trait RulModel {
    fn predict_rul(&self, window: &Matrix) -> Result<f64>;
}

impl<F> RulModel for F
where
    F: Fn(&Matrix) -> f64,
{
    fn predict_rul(&self, window: &Matrix) -> Result<f64> {
        Ok(self(window))
    }
}

/// The predictive network paired with its output scale.
#[derive(Debug, Clone, Copy)]
pub struct Predictor<'a> {
    pub net: &'a Mlp,
    pub rul_scale: f64,
}

impl RulModel for Predictor<'_> {
    fn predict_rul(&self, window: &Matrix) -> Result<f64> {
        pm_predict(self.net, self.rul_scale, window)
    }
}

/// Network output × `rul_scale`, clamped below at zero.
pub fn pm_predict(pm: &Mlp, rul_scale: f64, window: &Matrix) -> Result<f64> {
    if pm.input_dim() != window.rows() * window.cols() || pm.output_dim() != 1 {
        return Err(Error::GeometryMismatch(format!(
            "predictor takes {} inputs, window has {}",
            pm.input_dim(),
            window.rows() * window.cols()
        )));
    }
    let out = pm.forward(window.as_slice())?;
    Ok((out[0] * rul_scale).max(0.0))
}

pub fn pm_predict_instance(pm: &Mlp, rul_scale: f64, instance: &Instance) -> Result<f64> {
    pm_predict(pm, rul_scale, &instance.values)
}
