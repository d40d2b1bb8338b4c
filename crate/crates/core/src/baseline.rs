//! Fully connected feed-forward baseline network mapping stretch to stress.
//!
//! Hidden layers apply `tanh`; the output layer is affine. Inputs are raw
//! stretches, outputs nominal stress in MPa.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{CannError, Result};
use crate::optimizer::{Adam, AdamConfig};

/// Layer-structured weights and biases. `weights[k]` is row-major with shape
/// `layer_sizes[k + 1] x layer_sizes[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpParams {
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        check_layer_sizes(layer_sizes)?;
        let weights = layer_sizes.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self { layer_sizes: layer_sizes.to_vec(), weights, biases })
    }

    /// Zero biases, weights uniform in `±1/sqrt(fan_in)`.
    pub fn random(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        let mut p = Self::zeros(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (k, w) in p.weights.iter_mut().enumerate() {
            let bound = 1.0 / (layer_sizes[k] as f64).sqrt();
            w.iter_mut().for_each(|x| *x = rng.gen_range(-bound..=bound));
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_layer_sizes(&self.layer_sizes)?;
        let n_layers = self.layer_sizes.len() - 1;
        if self.weights.len() != n_layers || self.biases.len() != n_layers {
            return Err(CannError::Shape(format!(
                "{} layers declared but {} weight matrices and {} bias vectors given",
                n_layers,
                self.weights.len(),
                self.biases.len()
            )));
        }
        for k in 0..n_layers {
            let (n_in, n_out) = (self.layer_sizes[k], self.layer_sizes[k + 1]);
            if self.weights[k].len() != n_in * n_out || self.biases[k].len() != n_out {
                return Err(CannError::Shape(format!(
                    "layer {k}: expected {n_out}x{n_in} weights and {n_out} biases"
                )));
            }
        }
        if self.flatten().iter().any(|x| !x.is_finite()) {
            return Err(CannError::Shape("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn n_weights(&self) -> usize {
        self.weights.iter().map(Vec::len).sum()
    }

    pub fn n_biases(&self) -> usize {
        self.biases.iter().map(Vec::len).sum()
    }

    pub fn n_params(&self) -> usize {
        self.n_weights() + self.n_biases()
    }

    /// All weights (layer by layer), then all biases.
    pub fn flatten(&self) -> Vec<f64> {
        self.weights.iter().chain(self.biases.iter()).flatten().copied().collect()
    }

    pub fn set_from_flat(&mut self, flat: &[f64]) {
        debug_assert_eq!(flat.len(), self.n_params());
        let mut it = flat.iter();
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|x| *x = *it.next().unwrap());
        }
    }

    /// `Σ|output weights| + |output bias|`, an upper bound on `|output|`
    /// for any input since the last hidden layer is bounded by `tanh`.
    pub fn saturation_bound(&self) -> f64 {
        let last = self.weights.len() - 1;
        self.weights[last].iter().map(|w| w.abs()).sum::<f64>() + self.biases[last][0].abs()
    }

    /// Activations of every layer, input first.
    fn activations(&self, lambda: f64) -> Vec<Vec<f64>> {
        let n_layers = self.weights.len();
        let mut acts = Vec::with_capacity(n_layers + 1);
        acts.push(vec![lambda]);
        for k in 0..n_layers {
            let (n_in, n_out) = (self.layer_sizes[k], self.layer_sizes[k + 1]);
            let prev = &acts[k];
            let z: Vec<f64> = (0..n_out)
                .map(|i| {
                    let row = &self.weights[k][i * n_in..(i + 1) * n_in];
                    self.biases[k][i] + row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>()
                })
                .collect();
            let a = if k + 1 < n_layers { z.into_iter().map(f64::tanh).collect() } else { z };
            acts.push(a);
        }
        acts
    }
}

fn check_layer_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2
        || layer_sizes[0] != 1
        || *layer_sizes.last().unwrap() != 1
        || layer_sizes.contains(&0)
    {
        return Err(CannError::Shape(format!(
            "layer sizes must start and end with 1 and contain no zeros, got {layer_sizes:?}"
        )));
    }
    Ok(())
}

pub fn mlp_forward(params: &MlpParams, lambda: f64) -> Result<f64> {
    params.validate()?;
    Ok(params.activations(lambda).last().unwrap()[0])
}

/// `∂output/∂θ` by backpropagation, returned in the shape of `params`.
pub fn mlp_gradient(params: &MlpParams, lambda: f64) -> Result<MlpParams> {
    params.validate()?;
    Ok(backprop(params, lambda).1)
}

fn backprop(params: &MlpParams, lambda: f64) -> (f64, MlpParams) {
    let acts = params.activations(lambda);
    let n_layers = params.weights.len();
    let mut grad = MlpParams::zeros(&params.layer_sizes).expect("validated shape");
    // delta = ∂output/∂z for the current layer
    let mut delta = vec![1.0];
    for k in (0..n_layers).rev() {
        let n_in = params.layer_sizes[k];
        let prev = &acts[k];
        for (i, d) in delta.iter().enumerate() {
            grad.biases[k][i] = *d;
            for (g, p) in grad.weights[k][i * n_in..(i + 1) * n_in].iter_mut().zip(prev) {
                *g = d * p;
            }
        }
        if k > 0 {
            delta = (0..n_in)
                .map(|j| {
                    let back: f64 = delta.iter().enumerate().map(|(i, d)| d * params.weights[k][i * n_in + j]).sum();
                    back * (1.0 - prev[j] * prev[j])
                })
                .collect();
        }
    }
    (acts[n_layers][0], grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub params: MlpParams,
    /// Loss at the start of every epoch, MPa².
    pub loss_history: Vec<f64>,
    pub final_loss: f64,
    pub config: AdamConfig,
}

pub fn mlp_loss(params: &MlpParams, dataset: &Dataset) -> Result<f64> {
    params.validate()?;
    if dataset.is_empty() {
        return Err(CannError::Domain("dataset has no samples".into()));
    }
    let sum: f64 = dataset
        .samples
        .iter()
        .map(|s| {
            let r = params.activations(s.lambda).last().unwrap()[0] - s.stress;
            r * r
        })
        .sum();
    Ok(sum / dataset.len() as f64)
}

/// Full-batch ADAM on the mean squared stress error of a single-mode dataset.
pub fn mlp_train(dataset: &Dataset, config: &AdamConfig, layer_sizes: &[usize]) -> Result<BaselineRecord> {
    if dataset.is_empty() {
        return Err(CannError::Domain("dataset has no samples".into()));
    }
    if dataset.modes().len() != 1 {
        return Err(CannError::Domain(format!(
            "the baseline network maps a single stretch to a single stress; dataset has modes {:?}",
            dataset.modes().iter().map(|m| m.tag()).collect::<Vec<_>>()
        )));
    }
    config.validate()?;
    let mut params = MlpParams::random(layer_sizes, config.seed)?;
    let mut flat = params.flatten();
    let mut adam = Adam::new(*config, flat.len());
    let n = dataset.len() as f64;
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let mut loss = 0.0;
        let mut grad = vec![0.0; flat.len()];
        for s in &dataset.samples {
            let (out, g) = backprop(&params, s.lambda);
            let r = out - s.stress;
            loss += r * r;
            for (acc, gi) in grad.iter_mut().zip(g.flatten()) {
                *acc += 2.0 * r * gi / n;
            }
        }
        loss /= n;
        if !loss.is_finite() {
            return Err(CannError::Divergence { epoch, loss });
        }
        history.push(loss);
        adam.step(&mut flat, &grad);
        params.set_from_flat(&flat);
    }

    let final_loss = mlp_loss(&params, dataset)?;
    Ok(BaselineRecord { params, loss_history: history, final_loss, config: *config })
}
