use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp, Scratch};
use super::predict::pm_predict;
use crate::dataset::{Instance, WindowGeometry};
use crate::error::{Error, Result};
use crate::math::Rng;

/// Parameter update rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    /// Plain gradient descent with a fixed step.
    #[default]
    Sgd,
    /// Adam with the usual moment decays (0.9, 0.999) and bias correction.
    Adam,
}

/// Mini-batch gradient descent settings and hidden-layer widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Share of pairs held out to drive early stopping.
    pub validation_fraction: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: Option<usize>,
    pub hidden: Vec<usize>,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 7,
            validation_fraction: 0.0,
            patience: None,
            hidden: vec![128, 64],
            optimizer: Optimizer::Sgd,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::InvalidArgument(format!(
                "validation fraction must be in [0, 1), got {}",
                self.validation_fraction
            )));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidArgument("hidden layers must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Mean training loss of each epoch.
    pub losses: Vec<f64>,
    pub validation_losses: Vec<f64>,
    pub final_loss: f64,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Mlp,
    pub report: TrainReport,
}

/// Flattened input/target pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pairs {
    pub input_dim: usize,
    pub output_dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl Pairs {
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        Pairs {
            input_dim,
            output_dim,
            ..Default::default()
        }
    }

    pub fn push(&mut self, input: &[f64], target: &[f64]) {
        assert_eq!(input.len(), self.input_dim);
        assert_eq!(target.len(), self.output_dim);
        self.inputs.extend_from_slice(input);
        self.targets.extend_from_slice(target);
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.input_dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.output_dim..(i + 1) * self.output_dim]
    }
}

/// Trains a fresh network on `pairs`. Samples are visited in a seeded
/// shuffled order and gradients accumulate sequentially, so the result is
/// bit-reproducible for a given seed.
pub fn fit(pairs: &Pairs, config: &TrainConfig) -> Result<Trained> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::NoTrainingPairs("empty training set".into()));
    }
    let mut sizes = vec![pairs.input_dim];
    sizes.extend(&config.hidden);
    sizes.push(pairs.output_dim);
    let base = Rng::new(config.seed);
    let mut model = Mlp::new(&sizes, &mut base.fork(0))?;
    let mut order_rng = base.fork(1);

    let mut indices: Vec<usize> = (0..pairs.len()).collect();
    let n_val = (config.validation_fraction * pairs.len() as f64).floor() as usize;
    let validation: Vec<usize> = if n_val > 0 && n_val < pairs.len() {
        base.fork(2).shuffle(&mut indices);
        let val = indices.split_off(pairs.len() - n_val);
        indices.sort_unstable();
        val
    } else {
        Vec::new()
    };

    let mut grads = Gradients::zeros_like(&model);
    let mut adam = (config.optimizer == Optimizer::Adam).then(|| Adam::new(&model));
    let mut scratch = Scratch::new(&model);
    let mut losses = Vec::with_capacity(config.epochs);
    let mut validation_losses = Vec::new();
    let mut best: Option<(f64, Mlp)> = None;
    let mut since_best = 0;

    for epoch in 1..=config.epochs {
        order_rng.shuffle(&mut indices);
        let mut total = 0.0;
        for batch in indices.chunks(config.batch_size) {
            grads.clear();
            for &i in batch {
                total += model.accumulate_gradient(pairs.input(i), pairs.target(i), &mut grads, &mut scratch);
            }
            match adam.as_mut() {
                Some(state) => state.step(&mut model, &grads, batch.len(), config.learning_rate),
                None => model.descend(&grads, config.learning_rate / batch.len() as f64),
            }
        }
        let epoch_loss = total / indices.len() as f64;
        if !epoch_loss.is_finite() || !model.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        losses.push(epoch_loss);

        if !validation.is_empty() {
            let val_loss = mean_loss(&model, pairs, &validation)?;
            validation_losses.push(val_loss);
            if best.as_ref().is_none_or(|(b, _)| val_loss < *b) {
                best = Some((val_loss, model.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if config.patience.is_some_and(|p| since_best >= p) {
                    break;
                }
            }
        }
    }
    if let Some((_, m)) = best {
        model = m;
    }
    let epochs_run = losses.len();
    let final_loss = *losses.last().expect("at least one epoch");
    Ok(Trained {
        model,
        report: TrainReport {
            epochs_run,
            losses,
            validation_losses,
            final_loss,
        },
    })
}

struct Adam {
    m: Gradients,
    v: Gradients,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPSILON: f64 = 1e-8;

    fn new(model: &Mlp) -> Self {
        Adam {
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
            t: 0,
        }
    }

    /// Applies one update from gradients summed over `batch` samples.
    fn step(&mut self, model: &mut Mlp, grads: &Gradients, batch: usize, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let inv = 1.0 / batch as f64;
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                let g = g * inv;
                *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
                *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPSILON);
            }
        };
        for (l, layer) in model.layers_mut().iter_mut().enumerate() {
            update(layer.weights_mut(), &grads.weights[l], &mut self.m.weights[l], &mut self.v.weights[l]);
            update(layer.bias_mut(), &grads.biases[l], &mut self.m.biases[l], &mut self.v.biases[l]);
        }
    }
}

fn mean_loss(model: &Mlp, pairs: &Pairs, subset: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for &i in subset {
        total += model.loss(pairs.input(i), pairs.target(i))?;
    }
    Ok(total / subset.len() as f64)
}

fn check_instances(instances: &[Instance], geometry: &WindowGeometry) -> Result<()> {
    for inst in instances {
        geometry.check(&inst.values)?;
    }
    Ok(())
}

/// Window → RUL / `rul_scale`.
pub fn pm_pairs(instances: &[Instance], geometry: &WindowGeometry, rul_scale: f64) -> Result<Pairs> {
    check_instances(instances, geometry)?;
    let mut pairs = Pairs::new(geometry.j * geometry.n, 1);
    for inst in instances {
        pairs.push(inst.values.as_slice(), &[inst.target()? / rul_scale]);
    }
    Ok(pairs)
}

/// Window → the unit's next `Z` steps, read from the earliest window of the
/// same unit that covers them (the one ending `Z` cycles later at stride 1).
/// Windows with no such covering window in the set are skipped.
pub fn nf_pairs(instances: &[Instance], geometry: &WindowGeometry) -> Result<Pairs> {
    check_instances(instances, geometry)?;
    let mut by_end: BTreeMap<(u32, u32), &Instance> = BTreeMap::new();
    for inst in instances {
        by_end.insert((inst.unit_id, inst.end_cycle), inst);
    }
    let (n, z) = (geometry.n as u32, geometry.z as u32);
    let mut pairs = Pairs::new(geometry.j * geometry.n, geometry.j * geometry.z);
    let mut target = vec![0.0; geometry.j * geometry.z];
    for inst in instances {
        // Any later window of the unit that still contains the next Z cycles.
        let end = inst.end_cycle;
        let Some((&(_, later_end), later)) = by_end.range((inst.unit_id, end + z)..=(inst.unit_id, end + n)).next()
        else {
            continue;
        };
        let first = (end + 1 + n - 1 - later_end) as usize;
        for k in 0..geometry.z {
            for j in 0..geometry.j {
                target[k * geometry.j + j] = later.values.get(j, first + k);
            }
        }
        pairs.push(inst.values.as_slice(), &target);
    }
    Ok(pairs)
}

/// First `X` steps ⧺ PM prediction / `rul_scale` → last `Z` steps.
pub fn xyz_pairs(instances: &[Instance], pm: &Mlp, geometry: &WindowGeometry, rul_scale: f64) -> Result<Pairs> {
    check_instances(instances, geometry)?;
    let x = geometry.x();
    let mut pairs = Pairs::new(geometry.j * x + 1, geometry.j * geometry.z);
    let mut input = vec![0.0; geometry.j * x + 1];
    let mut target = vec![0.0; geometry.j * geometry.z];
    for inst in instances {
        prefix_steps(&inst.values, 0, x, &mut input[..geometry.j * x]);
        input[geometry.j * x] = pm_predict(pm, rul_scale, &inst.values)? / rul_scale;
        tail_steps(&inst.values, geometry, &mut target);
        pairs.push(&input, &target);
    }
    Ok(pairs)
}

/// Feature-major copy of steps `start..start + len` of a J×N window.
pub(crate) fn prefix_steps(values: &crate::math::Matrix, start: usize, len: usize, out: &mut [f64]) {
    for j in 0..values.rows() {
        out[j * len..(j + 1) * len].copy_from_slice(&values.row(j)[start..start + len]);
    }
}

/// Last `Z` steps as a step-major `Z × J` block.
pub(crate) fn tail_steps(values: &crate::math::Matrix, geometry: &WindowGeometry, out: &mut [f64]) {
    let first = geometry.n - geometry.z;
    for k in 0..geometry.z {
        for j in 0..geometry.j {
            out[k * geometry.j + j] = values.get(j, first + k);
        }
    }
}

pub fn pm_train(train: &[Instance], geometry: &WindowGeometry, rul_scale: f64, config: &TrainConfig) -> Result<Trained> {
    config.validate()?;
    fit(&pm_pairs(train, geometry, rul_scale)?, config)
}

pub fn nf_train(train: &[Instance], geometry: &WindowGeometry, config: &TrainConfig) -> Result<Trained> {
    config.validate()?;
    let pairs = nf_pairs(train, geometry)?;
    if pairs.is_empty() {
        return Err(Error::NoTrainingPairs(format!(
            "no window has a successor {} cycles later",
            geometry.z
        )));
    }
    fit(&pairs, config)
}

pub fn xyz_train(
    train: &[Instance],
    pm: &Mlp,
    geometry: &WindowGeometry,
    rul_scale: f64,
    config: &TrainConfig,
) -> Result<Trained> {
    config.validate()?;
    let pairs = xyz_pairs(train, pm, geometry, rul_scale)?;
    if pairs.is_empty() {
        return Err(Error::NoTrainingPairs("no instances".into()));
    }
    fit(&pairs, config)
}
