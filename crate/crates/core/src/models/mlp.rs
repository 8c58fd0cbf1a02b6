//! Dense feed-forward network with tanh hidden layers and a linear head.

use crate::error::{Error, Result};
use crate::math::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    inputs: usize,
    outputs: usize,
    /// `outputs × inputs`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    fn forward_into(&self, input: &[f64], out: &mut [f64]) {
        for (o, slot) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *slot = self.bias[o] + dot(row, input);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Per-parameter gradient buffers shaped like an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn clear(&mut self) {
        self.weights.iter_mut().for_each(|w| w.fill(0.0));
        self.biases.iter_mut().for_each(|b| b.fill(0.0));
    }
}

/// Activation buffers reused across samples.
#[derive(Debug, Clone)]
pub struct Scratch {
    activations: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl Scratch {
    pub fn new(net: &Mlp) -> Self {
        Scratch {
            activations: net.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
            delta: net.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
        }
    }
}

impl Mlp {
    /// Xavier-uniform initialization; `sizes` lists input, hidden and output widths.
    pub fn new(sizes: &[usize], rng: &mut Rng) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid layer sizes {sizes:?}")));
        }
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let limit = (6.0 / (inputs + outputs) as f64).sqrt();
                Dense {
                    inputs,
                    outputs,
                    weights: (0..inputs * outputs).map(|_| rng.uniform_range(-limit, limit)).collect(),
                    bias: vec![0.0; outputs],
                }
            })
            .collect();
        Ok(Mlp { layers })
    }

    /// Rebuilds a network from raw parameters (`weights[l]` is `out × in`).
    pub fn from_parts(sizes: &[usize], weights: Vec<Vec<f64>>, biases: Vec<Vec<f64>>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid layer sizes {sizes:?}")));
        }
        if weights.len() != sizes.len() - 1 || biases.len() != sizes.len() - 1 {
            return Err(Error::dims(format!("{} layers", sizes.len() - 1), weights.len()));
        }
        let mut layers = Vec::with_capacity(weights.len());
        for (l, (w, b)) in weights.into_iter().zip(biases).enumerate() {
            let (inputs, outputs) = (sizes[l], sizes[l + 1]);
            if w.len() != inputs * outputs || b.len() != outputs {
                return Err(Error::dims(
                    format!("layer {l}: {} weights, {outputs} biases", inputs * outputs),
                    format!("{} weights, {} biases", w.len(), b.len()),
                ));
            }
            if w.iter().chain(&b).any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("layer {l} has non-finite parameters")));
            }
            layers.push(Dense {
                inputs,
                outputs,
                weights: w,
                bias: b,
            });
        }
        Ok(Mlp { layers })
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::dims(format!("{} inputs", self.input_dim()), input.len()));
        }
        let mut scratch = Scratch::new(self);
        self.forward_scratch(input, &mut scratch);
        Ok(scratch.activations.pop().unwrap_or_default())
    }

    fn forward_scratch(&self, input: &[f64], scratch: &mut Scratch) {
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = scratch.activations.split_at_mut(l);
            let x = if l == 0 { input } else { &before[l - 1] };
            let out = &mut after[0];
            layer.forward_into(x, out);
            if l != last {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
        }
    }

    /// Mean squared error over the outputs; adds `∂loss/∂θ` into `grads`.
    pub fn accumulate_gradient(
        &self,
        input: &[f64],
        target: &[f64],
        grads: &mut Gradients,
        scratch: &mut Scratch,
    ) -> f64 {
        debug_assert_eq!(input.len(), self.input_dim());
        debug_assert_eq!(target.len(), self.output_dim());
        self.forward_scratch(input, scratch);
        let last = self.layers.len() - 1;
        let out_dim = self.output_dim() as f64;
        let mut loss = 0.0;
        for ((d, y), t) in scratch.delta[last].iter_mut().zip(&scratch.activations[last]).zip(target) {
            let e = y - t;
            loss += e * e;
            *d = 2.0 * e / out_dim;
        }
        for l in (0..=last).rev() {
            let layer = &self.layers[l];
            let x: &[f64] = if l == 0 { input } else { &scratch.activations[l - 1] };
            let (lower, upper) = scratch.delta.split_at_mut(l);
            let delta = &upper[0];
            let gw = &mut grads.weights[l];
            for (o, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    axpy(d, x, &mut gw[o * layer.inputs..(o + 1) * layer.inputs]);
                }
            }
            grads.biases[l].iter_mut().zip(delta).for_each(|(g, d)| *g += d);
            if l > 0 {
                let prev = &mut lower[l - 1];
                prev.fill(0.0);
                for (o, &d) in delta.iter().enumerate() {
                    if d != 0.0 {
                        axpy(d, &layer.weights[o * layer.inputs..(o + 1) * layer.inputs], prev);
                    }
                }
                // tanh'(z) = 1 - a^2
                for (p, a) in prev.iter_mut().zip(&scratch.activations[l - 1]) {
                    *p *= 1.0 - a * a;
                }
            }
        }
        loss / out_dim
    }

    /// `θ ← θ − step · g`.
    pub fn descend(&mut self, grads: &Gradients, step: f64) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(grads.weights.iter().zip(&grads.biases)) {
            axpy(-step, gw, &mut layer.weights);
            axpy(-step, gb, &mut layer.bias);
        }
    }

    /// Mean squared error of one sample.
    pub fn loss(&self, input: &[f64], target: &[f64]) -> Result<f64> {
        let y = self.forward(input)?;
        Ok(y.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorize without reassociating.
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        for k in 0..4 {
            acc[k] += a[4 * i + k] * b[4 * i + k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
