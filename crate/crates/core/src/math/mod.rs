//! Numerical primitives: matrices, standardization, first principal
//! component, weighted ridge regression and seeded randomness.

mod matrix;
mod pca;
mod ridge;
mod rng;
mod stats;

pub use matrix::Matrix;
pub use pca::{first_principal_component, PcaResult, POWER_MAX_ITERATIONS, POWER_TOLERANCE};
pub use ridge::{solve_in_place, weighted_ridge_fit, LinearFit, DEFAULT_LAMBDA};
pub use rng::{derive_seed, Rng};
pub use stats::{mean, median, standardize, ColumnStats, CONSTANT_STD};
