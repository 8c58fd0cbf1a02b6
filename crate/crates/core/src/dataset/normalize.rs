use serde::{Deserialize, Serialize};

use super::Instance;
use crate::error::{Error, Result};
use crate::math::{Matrix, CONSTANT_STD};

/// Training-set feature statistics and the RUL scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Largest training RUL; network targets and the conditioning channel
    /// are divided by it.
    pub rul_scale: f64,
}

/// Pools every cell of each feature over the training windows.
pub fn fit_normalizer(train: &[Instance]) -> Result<Normalizer> {
    let first = train
        .first()
        .ok_or_else(|| Error::Empty("no training instances".into()))?;
    let (j, n) = first.values.shape();
    let mut sum = vec![0.0; j];
    let mut rul_scale: f64 = 0.0;
    for inst in train {
        if inst.values.shape() != (j, n) {
            return Err(Error::dims(format!("{j}x{n}"), format!("{:?}", inst.values.shape())));
        }
        for (f, s) in sum.iter_mut().enumerate() {
            *s += inst.values.row(f).iter().sum::<f64>();
        }
        rul_scale = rul_scale.max(inst.target()?);
    }
    let count = (train.len() * n) as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / count).collect();
    let mut var = vec![0.0; j];
    for inst in train {
        for (f, v) in var.iter_mut().enumerate() {
            *v += inst.values.row(f).iter().map(|x| (x - mean[f]).powi(2)).sum::<f64>();
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / count).sqrt()).collect();
    if let Some(feature) = std.iter().position(|&s| s < CONSTANT_STD) {
        return Err(Error::ZeroVariance { feature });
    }
    if rul_scale <= 0.0 {
        return Err(Error::InvalidArgument("maximum training RUL must be positive".into()));
    }
    Ok(Normalizer { mean, std, rul_scale })
}

impl Normalizer {
    pub fn features(&self) -> usize {
        self.mean.len()
    }

    fn check(&self, features: usize) -> Result<()> {
        if features != self.features() {
            return Err(Error::GeometryMismatch(format!(
                "normalizer has {} features, data has {features}",
                self.features()
            )));
        }
        Ok(())
    }

    /// Z-scores a J×N window.
    pub fn normalize_window(&self, values: &Matrix) -> Result<Matrix> {
        self.check(values.rows())?;
        Matrix::from_fn(values.rows(), values.cols(), |j, n| (values.get(j, n) - self.mean[j]) / self.std[j])
    }

    pub fn denormalize_window(&self, values: &Matrix) -> Result<Matrix> {
        self.check(values.rows())?;
        Matrix::from_fn(values.rows(), values.cols(), |j, n| values.get(j, n) * self.std[j] + self.mean[j])
    }

    /// Maps a Z×J trajectory (steps by features) back to sensor units.
    pub fn denormalize_steps(&self, steps: &Matrix) -> Result<Matrix> {
        self.check(steps.cols())?;
        Matrix::from_fn(steps.rows(), steps.cols(), |k, j| steps.get(k, j) * self.std[j] + self.mean[j])
    }

    pub fn normalize_steps(&self, steps: &Matrix) -> Result<Matrix> {
        self.check(steps.cols())?;
        Matrix::from_fn(steps.rows(), steps.cols(), |k, j| (steps.get(k, j) - self.mean[j]) / self.std[j])
    }

    pub fn apply(&self, instance: &Instance) -> Result<Instance> {
        Ok(Instance {
            values: self.normalize_window(&instance.values)?,
            ..instance.clone()
        })
    }

    pub fn invert(&self, instance: &Instance) -> Result<Instance> {
        Ok(Instance {
            values: self.denormalize_window(&instance.values)?,
            ..instance.clone()
        })
    }
}

/// Applies a fitted normalizer to one instance.
pub fn apply_normalizer(instance: &Instance, normalizer: &Normalizer) -> Result<Instance> {
    normalizer.apply(instance)
}
