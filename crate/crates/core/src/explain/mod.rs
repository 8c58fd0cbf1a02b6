//! Local surrogate explanations of RUL predictions and their quality metrics.

mod metrics;
mod neighborhood;
mod surrogate;

pub use metrics::{evaluate_fidelity, evaluate_truthfulness, Fidelity, MetricReport, ProbeConfig, Truthfulness};
pub use neighborhood::{generate_neighbors, Neighborhood, NeighborhoodConfig, NoiseMode, MIN_NEIGHBORS};
pub use surrogate::{
    explain_ipca, explain_ipca_with, explain_mean, explain_mean_with, neighborhood_predictions, ExplainMethod,
    Explanation,
};
