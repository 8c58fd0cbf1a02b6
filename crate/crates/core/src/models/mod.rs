//! The feed-forward substrate and the three models built on it: the RUL
//! predictor (PM), the neural forecaster (NF) and the target-conditioned
//! forecaster (XYZ).

mod bundle;
mod mlp;
mod predict;
mod train;

pub use bundle::{
    load_bundle, save_bundle, BundleMeta, Fingerprints, ModelBundle, ModelFingerprint, BUNDLE_MAGIC,
    BUNDLE_VERSION,
};
pub use mlp::{Dense, Gradients, Mlp, Scratch};
pub use predict::{pm_predict, pm_predict_instance, Predictor, RulModel};
pub use train::{
    fit, nf_pairs, nf_train, pm_pairs, pm_train, xyz_pairs, xyz_train, Optimizer, Pairs, TrainConfig, TrainReport, Trained,
};
pub(crate) use train::prefix_steps;
