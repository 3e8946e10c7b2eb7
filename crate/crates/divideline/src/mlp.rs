//! Small feedforward regressor from coordinates to a scalar, trained by
//! full-batch gradient descent on mean-squared error. Used both for brand
//! membership (targets 0/1) and income prediction (scaled targets).

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::GeoPoint;
use crate::rng::{domain, stream};
use crate::standardize::Standardizer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative in terms of the pre-activation. relu'(0) is taken as 0.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config { msg: format!("unknown activation {other:?} (relu|tanh)") }),
        }
    }
}

/// Network shape: hidden layer sizes plus the hidden activation. Input is
/// always the 2 coordinates, output a single linear unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkArch {
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
}

impl Default for NetworkArch {
    fn default() -> Self {
        Self { hidden_sizes: vec![10], activation: Activation::Relu }
    }
}

impl NetworkArch {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_sizes.iter().any(|&h| h == 0) {
            return Err(Error::Config { msg: "hidden layer sizes must be >= 1".into() });
        }
        Ok(())
    }

    /// Layer widths from input to output: [2, hidden..., 1].
    fn dims(&self) -> Vec<usize> {
        let mut dims = vec![2];
        dims.extend_from_slice(&self.hidden_sizes);
        dims.push(1);
        dims
    }
}

/// Feedforward regressor. `weights[l]` is the layer-l matrix, row-major
/// with one row per output unit; `biases[l]` the matching offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    pub arch: NetworkArch,
    pub input_standardizer: Standardizer,
    /// Clamp range applied at map-rendering time only, never in training.
    pub output_range: (f64, f64),
}

/// Training parameters for full-batch gradient descent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// L2 weight decay on weights (not biases).
    pub l2: f64,
    /// Early stop once the loss drops below this.
    pub target_loss: f64,
}

impl TrainConfig {
    pub const DEFAULT_LEARNING_RATE: f64 = 0.05;
    pub const DEFAULT_EPOCHS: usize = 2000;
    pub const DEFAULT_L2: f64 = 1e-4;
    pub const DEFAULT_TARGET_LOSS: f64 = 1e-6;

    pub fn with_seed(seed: u64) -> Self {
        Self {
            learning_rate: Self::DEFAULT_LEARNING_RATE,
            epochs: Self::DEFAULT_EPOCHS,
            seed,
            l2: Self::DEFAULT_L2,
            target_loss: Self::DEFAULT_TARGET_LOSS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.epochs == 0 || self.l2 < 0.0 {
            return Err(Error::Config { msg: format!("invalid train config: {self:?}") });
        }
        Ok(())
    }
}

/// Parameter gradients, same shapes as the network's weights and biases.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Initialize a network: weights drawn from N(0, 1/fan_in), biases zero,
/// deterministic per seed.
pub fn init_network(
    arch: &NetworkArch,
    input_standardizer: Standardizer,
    output_range: (f64, f64),
    seed: u64,
) -> Result<Network> {
    arch.validate()?;
    let dims = arch.dims();
    let mut rng = stream(seed, domain::NET_INIT, 0);
    let mut weights = Vec::with_capacity(dims.len() - 1);
    let mut biases = Vec::with_capacity(dims.len() - 1);
    for l in 0..dims.len() - 1 {
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        let dist = Normal::new(0.0, 1.0 / (fan_in as f64).sqrt()).expect("valid normal");
        weights.push((0..fan_in * fan_out).map(|_| dist.sample(&mut rng)).collect());
        biases.push(vec![0.0; fan_out]);
    }
    Ok(Network { weights, biases, arch: arch.clone(), input_standardizer, output_range })
}

impl Network {
    /// Build a network from explicit parameters (model files, tests).
    pub fn from_parts(
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        arch: NetworkArch,
        input_standardizer: Standardizer,
        output_range: (f64, f64),
    ) -> Result<Self> {
        arch.validate()?;
        let dims = arch.dims();
        if weights.len() != dims.len() - 1 || biases.len() != dims.len() - 1 {
            return Err(Error::Config { msg: "layer count mismatch".into() });
        }
        for l in 0..dims.len() - 1 {
            if weights[l].len() != dims[l] * dims[l + 1] || biases[l].len() != dims[l + 1] {
                return Err(Error::Config { msg: format!("layer {l} dimension mismatch") });
            }
            if weights[l].iter().chain(&biases[l]).any(|v| !v.is_finite()) {
                return Err(Error::Config { msg: format!("layer {l} has non-finite parameters") });
            }
        }
        Ok(Self { weights, biases, arch, input_standardizer, output_range })
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    fn layer_count(&self) -> usize {
        self.weights.len()
    }

    /// Forward pass over the standardized input; the final layer is
    /// linear and the raw value is returned without clamping.
    pub fn forward(&self, p: GeoPoint) -> f64 {
        let x = self.input_standardizer.standardize(p);
        let mut activations = vec![x[0], x[1]];
        for l in 0..self.layer_count() {
            activations = self.layer_forward(l, &activations).1;
        }
        activations[0]
    }

    /// Forward pass clamped to the output range, for map rendering.
    pub fn forward_clamped(&self, p: GeoPoint) -> f64 {
        self.forward(p).clamp(self.output_range.0, self.output_range.1)
    }

    /// One layer: returns (pre-activations, activations). The output layer
    /// applies no activation.
    fn layer_forward(&self, l: usize, input: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let fan_in = input.len();
        let last = l + 1 == self.layer_count();
        let mut z = self.biases[l].clone();
        for (row, zr) in z.iter_mut().enumerate() {
            let w = &self.weights[l][row * fan_in..(row + 1) * fan_in];
            *zr += w.iter().zip(input).map(|(wi, xi)| wi * xi).sum::<f64>();
        }
        let a = if last { z.clone() } else { z.iter().map(|&v| self.arch.activation.apply(v)).collect() };
        (z, a)
    }
}

/// Mean-squared error plus l2 weight penalty over a batch.
pub fn loss(net: &Network, batch: &[(GeoPoint, f64)], l2: f64) -> f64 {
    assert!(!batch.is_empty(), "batch must be nonempty");
    let mse = batch
        .iter()
        .map(|(p, t)| {
            let e = net.forward(*p) - t;
            e * e
        })
        .sum::<f64>()
        / batch.len() as f64;
    let penalty: f64 = net.weights.iter().flatten().map(|w| w * w).sum::<f64>();
    mse + l2 * penalty
}

/// Exact gradient of (MSE + l2 penalty) by backpropagation.
pub fn gradient(net: &Network, batch: &[(GeoPoint, f64)], l2: f64) -> Gradients {
    assert!(!batch.is_empty(), "batch must be nonempty");
    let layers = net.layer_count();
    let mut grads = Gradients {
        weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
        biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
    };
    let inv_n = 1.0 / batch.len() as f64;

    for (p, target) in batch {
        // forward, keeping layer inputs and pre-activations
        let x = net.input_standardizer.standardize(*p);
        let mut inputs: Vec<Vec<f64>> = vec![vec![x[0], x[1]]];
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(layers);
        for l in 0..layers {
            let (z, a) = net.layer_forward(l, &inputs[l]);
            pre.push(z);
            inputs.push(a);
        }
        let out = inputs[layers][0];

        // backward: delta = dLoss/dz per layer
        let mut delta = vec![2.0 * (out - target) * inv_n];
        for l in (0..layers).rev() {
            let fan_in = inputs[l].len();
            for (row, d) in delta.iter().enumerate() {
                for col in 0..fan_in {
                    grads.weights[l][row * fan_in + col] += d * inputs[l][col];
                }
                grads.biases[l][row] += d;
            }
            if l > 0 {
                let mut prev = vec![0.0; fan_in];
                for (row, d) in delta.iter().enumerate() {
                    for (col, pv) in prev.iter_mut().enumerate() {
                        *pv += d * net.weights[l][row * fan_in + col];
                    }
                }
                for (col, pv) in prev.iter_mut().enumerate() {
                    *pv *= net.arch.activation.derivative(pre[l - 1][col]);
                }
                delta = prev;
            }
        }
    }

    for (gw, w) in grads.weights.iter_mut().zip(&net.weights) {
        for (g, wi) in gw.iter_mut().zip(w) {
            *g += 2.0 * l2 * wi;
        }
    }
    grads
}

/// Full-batch gradient descent for `epochs` or until the loss drops below
/// `target_loss`. Returns the best iterate seen, so the final loss never
/// exceeds the initial loss. A non-finite loss aborts with
/// `DivergenceDetected`.
pub fn train(net: Network, data: &[(GeoPoint, f64)], cfg: &TrainConfig) -> Result<Network> {
    cfg.validate()?;
    assert!(!data.is_empty(), "training data must be nonempty");
    if data.iter().any(|(_, t)| !t.is_finite()) {
        return Err(Error::Config { msg: "training targets must be finite".into() });
    }
    let mut net = net;
    let mut best_loss = loss(&net, data, cfg.l2);
    let mut best = net.clone();
    if best_loss < cfg.target_loss {
        return Ok(best);
    }
    for epoch in 0..cfg.epochs {
        let g = gradient(&net, data, cfg.l2);
        for (w, gw) in net.weights.iter_mut().zip(&g.weights) {
            for (wi, gi) in w.iter_mut().zip(gw) {
                *wi -= cfg.learning_rate * gi;
            }
        }
        for (b, gb) in net.biases.iter_mut().zip(&g.biases) {
            for (bi, gi) in b.iter_mut().zip(gb) {
                *bi -= cfg.learning_rate * gi;
            }
        }
        let l = loss(&net, data, cfg.l2);
        if !l.is_finite() {
            return Err(Error::DivergenceDetected { epoch });
        }
        if l < best_loss {
            best_loss = l;
            best = net.clone();
        }
        if l < cfg.target_loss {
            break;
        }
    }
    Ok(best)
}

/// Classification accuracy of a 0/1-target regressor: predict 1 when the
/// raw output is >= 0.5 (ties go to class 1).
pub fn classify_accuracy(net: &Network, test: &[(GeoPoint, u8)]) -> f64 {
    assert!(!test.is_empty(), "test set must be nonempty");
    let correct = test
        .iter()
        .filter(|(p, label)| {
            let predicted: u8 = if net.forward(*p) >= 0.5 { 1 } else { 0 };
            predicted == *label
        })
        .count();
    correct as f64 / test.len() as f64
}
