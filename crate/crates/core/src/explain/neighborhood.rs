use serde::{Deserialize, Serialize};

use crate::dataset::Instance;
use crate::error::{Error, Result};
use crate::math::{median, Matrix, Rng};

pub const MIN_NEIGHBORS: usize = 10;

/// How the non-masked branch perturbs a feature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// One Gaussian draw shifts every step of the feature.
    #[default]
    Shift,
    /// Independent Gaussian draw per step.
    PerStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeighborhoodConfig {
    pub count: usize,
    /// Noise standard deviation in normalized units.
    pub noise_scale: f64,
    /// Per-feature probability of masking a sub-sequence with the feature mean.
    pub mask_probability: f64,
    pub noise_mode: NoiseMode,
}

impl Default for NeighborhoodConfig {
    fn default() -> Self {
        NeighborhoodConfig {
            count: 1000,
            noise_scale: 0.5,
            mask_probability: 0.0,
            noise_mode: NoiseMode::Shift,
        }
    }
}

/// Perturbed copies of an instance with Gaussian-kernel proximity weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighborhood {
    pub center: Instance,
    pub neighbors: Vec<Matrix>,
    pub distances: Vec<f64>,
    /// `exp(−d²/σ²)`.
    pub weights: Vec<f64>,
    /// Kernel width σ.
    pub bandwidth: f64,
}

impl Neighborhood {
    /// Builds a neighborhood from explicit neighbors.
    pub fn from_neighbors(center: Instance, neighbors: Vec<Matrix>) -> Result<Self> {
        if neighbors.len() < MIN_NEIGHBORS {
            return Err(Error::InvalidArgument(format!(
                "a neighborhood needs at least {MIN_NEIGHBORS} neighbors, got {}",
                neighbors.len()
            )));
        }
        if let Some(bad) = neighbors.iter().find(|m| m.shape() != center.values.shape()) {
            return Err(Error::dims(format!("{:?}", center.values.shape()), format!("{:?}", bad.shape())));
        }
        let distances: Vec<f64> = neighbors
            .iter()
            .map(|m| {
                m.as_slice()
                    .iter()
                    .zip(center.values.as_slice())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let mut bandwidth = median(&distances);
        if !(bandwidth > 0.0) {
            bandwidth = 1.0;
        }
        let weights = distances
            .iter()
            .map(|d| (-(d * d) / (bandwidth * bandwidth)).exp())
            .collect();
        Ok(Neighborhood {
            center,
            neighbors,
            distances,
            weights,
            bandwidth,
        })
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// The center followed by every neighbor: the rows surrogates are fitted on.
    pub fn samples(&self) -> impl Iterator<Item = &Matrix> {
        std::iter::once(&self.center.values).chain(&self.neighbors)
    }

    /// Weights aligned with [`Neighborhood::samples`]; the center weighs 1.
    pub fn sample_weights(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.weights.iter().copied()).collect()
    }
}

/// Perturbs each feature independently: with `mask_probability` a random
/// contiguous run of steps is replaced by the feature's window mean,
/// otherwise Gaussian noise of `noise_scale` is added.
pub fn generate_neighbors(
    instance: &Instance,
    count: usize,
    rng: &mut Rng,
    config: &NeighborhoodConfig,
) -> Result<Neighborhood> {
    if count < MIN_NEIGHBORS {
        return Err(Error::InvalidArgument(format!(
            "neighbor count must be >= {MIN_NEIGHBORS}, got {count}"
        )));
    }
    if !(config.noise_scale >= 0.0) || !(0.0..=1.0).contains(&config.mask_probability) {
        return Err(Error::InvalidArgument(
            "noise scale must be >= 0 and mask probability in [0, 1]".into(),
        ));
    }
    let (j, n) = instance.values.shape();
    let means: Vec<f64> = (0..j)
        .map(|f| instance.values.row(f).iter().sum::<f64>() / n as f64)
        .collect();
    let mut neighbors = Vec::with_capacity(count);
    for _ in 0..count {
        let mut m = instance.values.clone();
        for (f, &mean) in means.iter().enumerate() {
            if rng.bernoulli(config.mask_probability) {
                let start = rng.below(n);
                let len = 1 + rng.below(n - start);
                for t in start..start + len {
                    m.set(f, t, mean);
                }
            } else {
                match config.noise_mode {
                    NoiseMode::Shift => {
                        let shift = config.noise_scale * rng.normal();
                        for t in 0..n {
                            m.set(f, t, m.get(f, t) + shift);
                        }
                    }
                    NoiseMode::PerStep => {
                        for t in 0..n {
                            let e = config.noise_scale * rng.normal();
                            m.set(f, t, m.get(f, t) + e);
                        }
                    }
                }
            }
        }
        neighbors.push(m);
    }
    Neighborhood::from_neighbors(instance.clone(), neighbors)
}
