use serde::{Deserialize, Serialize};

use crate::dataset::Instance;
use crate::error::{Error, Result};
use crate::math::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModificationKind {
    UniformNoise,
    GaussianNoise,
    ReplaceMean,
    ReplaceZeros,
}

impl ModificationKind {
    /// All kinds, in tie-break order.
    pub const ALL: [ModificationKind; 4] = [
        ModificationKind::UniformNoise,
        ModificationKind::GaussianNoise,
        ModificationKind::ReplaceMean,
        ModificationKind::ReplaceZeros,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&k| k == self).expect("listed")
    }

    pub fn is_noise(self) -> bool {
        matches!(self, ModificationKind::UniformNoise | ModificationKind::GaussianNoise)
    }
}

/// A what-if edit of steps `start..end` of one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modification {
    pub feature: usize,
    pub start: usize,
    pub end: usize,
    pub kind: ModificationKind,
    /// Noise half-width (uniform) or standard deviation (Gaussian), in
    /// normalized units. Ignored by the replacement kinds.
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Modification {
    pub fn validate(&self, features: usize, steps: usize) -> Result<()> {
        if self.feature >= features {
            return Err(Error::InvalidArgument(format!(
                "feature {} out of range (J = {features})",
                self.feature
            )));
        }
        if !(self.start < self.end && self.end <= steps) {
            return Err(Error::InvalidArgument(format!(
                "range [{}, {}) must satisfy 0 <= start < end <= {steps}",
                self.start, self.end
            )));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be finite and >= 0, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// Applies the edit; noise is drawn from the modification's own seed so the
/// result is replayable. Cells outside `(feature, start..end)` are untouched.
pub fn apply_modification(instance: &Instance, modification: &Modification) -> Result<Instance> {
    let (j, n) = instance.values.shape();
    modification.validate(j, n)?;
    let f = modification.feature;
    let range = modification.start..modification.end;
    let mut values = instance.values.clone();
    let mut rng = Rng::new(modification.seed);
    let a = modification.amplitude;
    match modification.kind {
        ModificationKind::UniformNoise => {
            for t in range {
                let e = rng.uniform_range(-a, a);
                values.set(f, t, values.get(f, t) + e);
            }
        }
        ModificationKind::GaussianNoise => {
            for t in range {
                let e = a * rng.normal();
                values.set(f, t, values.get(f, t) + e);
            }
        }
        ModificationKind::ReplaceMean => {
            // Centered on the first value so a constant row maps to itself exactly.
            let row = instance.values.row(f);
            let mean = row[0] + row.iter().map(|v| v - row[0]).sum::<f64>() / n as f64;
            for t in range {
                values.set(f, t, mean);
            }
        }
        ModificationKind::ReplaceZeros => {
            for t in range {
                values.set(f, t, 0.0);
            }
        }
    }
    Ok(Instance {
        values,
        ..instance.clone()
    })
}
