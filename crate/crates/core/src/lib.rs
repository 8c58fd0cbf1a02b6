//! Prescriptive-maintenance engine for multivariate time-series RUL
//! regression.
//!
//! A J×N window of sensor readings ([`dataset::Instance`]) is scored by a
//! feed-forward RUL predictor, explained by local linear surrogates (either
//! over every time step or over one principal-component score per feature),
//! edited through what-if modifications, and extended by forecasters,
//! including one conditioned on a desired RUL.

pub mod dataset;
pub mod engine;
pub mod error;
pub mod evaluate;
pub mod explain;
pub mod forecast;
pub mod math;
pub mod models;
pub mod prescribe;

pub use dataset::{Instance, Normalizer, PreparedData, WindowGeometry};
pub use engine::{train_bundle, Engine, EngineSettings, ExplainOutcome, TrainPlan};
pub use error::{Error, Result};
pub use evaluate::{evaluate, Evaluation};
pub use explain::{ExplainMethod, Explanation};
pub use forecast::{Forecast, ForecasterChoice, StaticMode};
pub use math::{Matrix, Rng};
pub use models::{ModelBundle, RulModel};
pub use prescribe::{Modification, ModificationKind, PrescribeMode, PrescriptionReport};
