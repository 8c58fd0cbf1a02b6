//! End-to-end operations over a trained bundle. The CLI and the HTTP
//! service both go through [`Engine`], so equal seeds give equal answers.

use serde::{Deserialize, Serialize};

use crate::dataset::{Instance, PreparedData};
use crate::error::Result;
use crate::explain::{
    evaluate_fidelity, evaluate_truthfulness, explain_ipca_with, explain_mean_with, generate_neighbors,
    neighborhood_predictions, ExplainMethod, Explanation, MetricReport, Neighborhood, NeighborhoodConfig,
    ProbeConfig,
};
use crate::forecast::{
    slide_window, Forecast, Forecaster, ForecasterChoice, NeuralForecaster, StaticForecaster, StaticMode,
};
use crate::math::{Rng, DEFAULT_LAMBDA};
use crate::models::{
    nf_train, pm_train, xyz_train, BundleMeta, Fingerprints, ModelBundle, ModelFingerprint, Optimizer, RulModel,
    TrainConfig,
};
use crate::prescribe::{compare_prescription, recommend, xyz_prescribe, PrescribeMode, PrescriptionReport, Recommendations};

/// Training settings for the three networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainPlan {
    pub pm: TrainConfig,
    pub nf: TrainConfig,
    pub xyz: TrainConfig,
}

impl Default for TrainPlan {
    fn default() -> Self {
        TrainPlan::with_seed(7)
    }
}

impl TrainPlan {
    /// Default configs; the three networks get distinct seeds derived from `seed`.
    pub fn with_seed(seed: u64) -> Self {
        let cfg = |offset| TrainConfig {
            seed: seed.wrapping_add(offset),
            ..TrainConfig::default()
        };
        TrainPlan {
            pm: cfg(0),
            nf: cfg(1),
            xyz: cfg(2),
        }
    }

    /// Settings tuned on the synthetic benchmark: PM and NF use plain descent
    /// at a larger step, and XYZ is a single linear layer trained with Adam.
    /// The conditioning channel explains well under 1% of XYZ's target
    /// variance, which plain descent on a tanh network does not pick up.
    pub fn tuned(seed: u64) -> Self {
        let mut plan = TrainPlan::with_seed(seed).map(|c| c.learning_rate = 1e-2);
        plan.xyz.hidden = Vec::new();
        plan.xyz.optimizer = Optimizer::Adam;
        plan.xyz.learning_rate = 3e-3;
        plan.xyz.epochs = 60;
        plan
    }

    pub fn map(mut self, f: impl Fn(&mut TrainConfig)) -> Self {
        f(&mut self.pm);
        f(&mut self.nf);
        f(&mut self.xyz);
        self
    }
}

/// Trains PM, then NF and XYZ (the latter conditioned on PM predictions).
pub fn train_bundle(data: &PreparedData, plan: &TrainPlan) -> Result<ModelBundle> {
    let g = data.geometry;
    let scale = data.normalizer.rul_scale;
    let pm = pm_train(&data.train, &g, scale, &plan.pm)?;
    let nf = nf_train(&data.train, &g, &plan.nf)?;
    let xyz = xyz_train(&data.train, &pm.model, &g, scale, &plan.xyz)?;
    let meta = BundleMeta {
        sensor_names: data.sensor_names.clone(),
        retained: data.retained.clone(),
        ingest: data.config.clone(),
        fingerprints: Fingerprints {
            seed: plan.pm.seed,
            pm: ModelFingerprint::from(&pm.report),
            nf: ModelFingerprint::from(&nf.report),
            xyz: ModelFingerprint::from(&xyz.report),
        },
    };
    ModelBundle::new(pm.model, nf.model, xyz.model, data.normalizer.clone(), g, meta)
}

/// Explanation and analysis defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineSettings {
    pub neighborhood: NeighborhoodConfig,
    pub lambda: f64,
    pub probe: ProbeConfig,
    pub static_mode: StaticMode,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            neighborhood: NeighborhoodConfig::default(),
            lambda: DEFAULT_LAMBDA,
            probe: ProbeConfig::default(),
            static_mode: StaticMode::Reflect,
        }
    }
}

/// An explanation with its quality metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainOutcome {
    pub seed: u64,
    pub prediction: f64,
    pub explanation: Explanation,
    pub metrics: MetricReport,
}

pub struct Engine<'a> {
    pub bundle: &'a ModelBundle,
    pub settings: EngineSettings,
}

impl<'a> Engine<'a> {
    pub fn new(bundle: &'a ModelBundle) -> Self {
        Engine {
            bundle,
            settings: EngineSettings::default(),
        }
    }

    pub fn with_settings(bundle: &'a ModelBundle, settings: EngineSettings) -> Self {
        Engine { bundle, settings }
    }

    pub fn pm(&self) -> impl RulModel + 'a {
        self.bundle.predictor()
    }

    pub fn predict(&self, instance: &Instance) -> Result<f64> {
        self.bundle.geometry.check(&instance.values)?;
        self.bundle.predictor().predict_rul(&instance.values)
    }

    pub fn forecaster(&self, choice: ForecasterChoice) -> Box<dyn Forecaster + 'a> {
        match choice {
            ForecasterChoice::Static => Box::new(StaticForecaster {
                horizon: self.bundle.geometry.z,
                mode: self.settings.static_mode,
            }),
            ForecasterChoice::Neural => Box::new(NeuralForecaster {
                net: &self.bundle.nf,
                geometry: self.bundle.geometry,
            }),
        }
    }

    /// Normalized `Z × J` forecast.
    pub fn forecast(&self, instance: &Instance, choice: ForecasterChoice) -> Result<Forecast> {
        self.bundle.geometry.check(&instance.values)?;
        self.forecaster(choice).forecast(&instance.values)
    }

    pub fn future_rul(&self, instance: &Instance, choice: ForecasterChoice) -> Result<f64> {
        let f = self.forecast(instance, choice)?;
        self.predict(&slide_window(instance, &f.values)?)
    }

    pub fn neighborhood(&self, instance: &Instance, seed: u64) -> Result<Neighborhood> {
        self.bundle.geometry.check(&instance.values)?;
        let cfg = &self.settings.neighborhood;
        generate_neighbors(instance, cfg.count, &mut Rng::new(seed), cfg)
    }

    pub fn explain(&self, instance: &Instance, method: ExplainMethod, seed: u64) -> Result<ExplainOutcome> {
        let nbhd = self.neighborhood(instance, seed)?;
        let preds = neighborhood_predictions(&self.bundle.predictor(), &nbhd)?;
        self.explain_on(&nbhd, &preds, method, seed)
    }

    /// Both methods on one shared neighborhood (mean-aggregated first).
    pub fn explain_both(&self, instance: &Instance, seed: u64) -> Result<[ExplainOutcome; 2]> {
        let nbhd = self.neighborhood(instance, seed)?;
        let preds = neighborhood_predictions(&self.bundle.predictor(), &nbhd)?;
        Ok([
            self.explain_on(&nbhd, &preds, ExplainMethod::MeanAgg, seed)?,
            self.explain_on(&nbhd, &preds, ExplainMethod::Ipca, seed)?,
        ])
    }

    fn explain_on(
        &self,
        nbhd: &Neighborhood,
        preds: &[f64],
        method: ExplainMethod,
        seed: u64,
    ) -> Result<ExplainOutcome> {
        let explanation = match method {
            ExplainMethod::MeanAgg => explain_mean_with(nbhd, preds, self.settings.lambda)?,
            ExplainMethod::Ipca => explain_ipca_with(nbhd, preds, self.settings.lambda, &mut Rng::new(seed).fork(1))?,
        };
        let pm = self.bundle.predictor();
        let fidelity = evaluate_fidelity(&pm, &explanation, nbhd)?;
        let truth = evaluate_truthfulness(&pm, &nbhd.center, &explanation, &self.settings.probe)?;
        Ok(ExplainOutcome {
            seed,
            prediction: preds[0],
            explanation,
            metrics: MetricReport {
                fidelity_mae: fidelity.mae,
                fidelity_r2: fidelity.r2,
                truthfulness: truth.score,
                probe_count: truth.probes,
            },
        })
    }

    pub fn recommend(&self, instance: &Instance, explanation: &Explanation, seed: u64) -> Result<Recommendations> {
        self.bundle.geometry.check(&instance.values)?;
        recommend(&self.bundle.predictor(), instance, explanation, seed)
    }

    pub fn prescribe(
        &self,
        instance: &Instance,
        desired_target: f64,
        mode: PrescribeMode,
        choice: ForecasterChoice,
    ) -> Result<PrescriptionReport> {
        let b = self.bundle;
        let suggestion = xyz_prescribe(&b.xyz, &b.geometry, b.rul_scale(), instance, desired_target, mode)?;
        compare_prescription(
            &b.predictor(),
            &b.normalizer,
            instance,
            &suggestion,
            self.forecaster(choice).as_ref(),
            desired_target,
        )
    }
}
