//! Mean-squared-error loss, the ADAM optimizer and the projected training
//! loop for the twelve energy weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::energy::{CannWeights, Term, N_PARAMS};
use crate::error::{CannError, Result};
use crate::kinematics;
use crate::stress::{nominal_stress, stress_weight_gradient};

pub const DEFAULT_SEED: u64 = 20_221_007;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub seed: u64,
    pub init_scale: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 10_000,
            seed: DEFAULT_SEED,
            init_scale: 0.5,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0
            && self.epochs >= 1
            && self.init_scale >= 0.0
            && self.init_scale.is_finite();
        if ok {
            Ok(())
        } else {
            Err(CannError::Domain(format!("invalid optimizer configuration: {self:?}")))
        }
    }
}

/// Adam state for a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(config: AdamConfig, n_params: usize) -> Self {
        Self { config, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }

    /// One bias-corrected update, in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), self.m.len());
        debug_assert_eq!(grad.len(), self.m.len());
        let AdamConfig { learning_rate, beta1, beta2, epsilon, .. } = self.config;
        self.t += 1;
        let bc1 = 1.0 - beta1.powi(self.t);
        let bc2 = 1.0 - beta2.powi(self.t);
        for ((p, g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
}

fn require_samples(dataset: &Dataset) -> Result<()> {
    if dataset.is_empty() {
        Err(CannError::Domain("dataset has no samples".into()))
    } else {
        Ok(())
    }
}

/// Mean squared `P1` residual, pooled over all samples with equal weight.
pub fn mse_loss(weights: &CannWeights, dataset: &Dataset) -> Result<f64> {
    require_samples(dataset)?;
    let mut sum = 0.0;
    for s in &dataset.samples {
        let r = nominal_stress(weights, s.mode, s.lambda)?.p1 - s.stress;
        sum += r * r;
    }
    Ok(sum / dataset.len() as f64)
}

/// Gradient of [`mse_loss`] with respect to the twelve weights.
pub fn loss_gradient(weights: &CannWeights, dataset: &Dataset) -> Result<[f64; N_PARAMS]> {
    Ok(loss_and_gradient(weights, dataset)?.1)
}

pub fn loss_and_gradient(weights: &CannWeights, dataset: &Dataset) -> Result<(f64, [f64; N_PARAMS])> {
    require_samples(dataset)?;
    let n = dataset.len() as f64;
    let mut loss = 0.0;
    let mut grad = [0.0; N_PARAMS];
    for s in &dataset.samples {
        let r = nominal_stress(weights, s.mode, s.lambda)?.p1 - s.stress;
        loss += r * r;
        let dp = stress_weight_gradient(weights, s.mode, s.lambda)?;
        for (g, d) in grad.iter_mut().zip(dp) {
            *g += 2.0 * r * d;
        }
    }
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

/// Outcome of [`train_cann`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    /// Lowest-loss weights visited, including the point after the last step.
    pub final_weights: CannWeights,
    /// Epoch whose starting weights are `final_weights`; `epochs + 1` means
    /// the point after the last step.
    pub best_epoch: usize,
    /// Loss at the start of every epoch, MPa².
    pub loss_history: Vec<f64>,
    pub epochs_run: usize,
    /// Loss at `final_weights`.
    pub final_loss: f64,
    pub config: AdamConfig,
}

/// Largest argument each exponential term sees on the dataset
/// (`I - 3` or `(I - 3)^2`), floored at one.
/// Largest exponent change a unit step in scaled coordinates may cause.
pub const EXPONENT_STEP_BUDGET: f64 = 20.0;

fn max_exponent_arguments(dataset: &Dataset) -> Result<[f64; N_PARAMS]> {
    let mut max_x = [0.0_f64; 2];
    for s in &dataset.samples {
        let inv = kinematics::invariants(s.mode, s.lambda)?;
        max_x[0] = max_x[0].max(inv.i1 - 3.0);
        max_x[1] = max_x[1].max(inv.i2 - 3.0);
    }
    let mut out = [1.0; N_PARAMS];
    for t in Term::ALL.into_iter().filter(|t| t.is_exponential()) {
        let x = match t.invariant() {
            crate::energy::Invariant::I1 => max_x[0],
            crate::energy::Invariant::I2 => max_x[1],
        };
        let arg = if t.activation() == crate::energy::ActivationKind::ExpLinear { x } else { x * x };
        out[t.param_indices()[0]] = arg.max(1.0);
    }
    Ok(out)
}

/// Per-parameter scale of the coordinates ADAM works in: exponential inner
/// coefficients whose largest argument on the data exceeds [`EXPONENT_STEP_BUDGET`]
/// are multiplied by `argument / budget`, every other weight by one. A step of
/// size `lr` then moves no exponent by more than `budget * lr`.
pub fn parameter_scales(dataset: &Dataset) -> Result<[f64; N_PARAMS]> {
    Ok(max_exponent_arguments(dataset)?.map(|a| (a / EXPONENT_STEP_BUDGET).max(1.0)))
}

/// Random feasible starting point. Every weight is uniform in `[0, init_scale]`,
/// inner coefficients then divided by the largest argument their exponential
/// sees, so no exponent starts above `init_scale`.
pub fn initial_weights(dataset: &Dataset, config: &AdamConfig) -> Result<CannWeights> {
    let args = max_exponent_arguments(dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let w: [f64; N_PARAMS] = std::array::from_fn(|k| rng.gen_range(0.0..=config.init_scale) / args[k]);
    Ok(CannWeights::from_array(&w))
}

/// Full-batch ADAM with projection onto `w >= 0` after every step.
pub fn train_cann(dataset: &Dataset, config: &AdamConfig) -> Result<TrainingRecord> {
    let init = initial_weights(dataset, config)?;
    train_cann_from(dataset, config, init)
}

/// As [`train_cann`], starting from the given weights.
pub fn train_cann_from(dataset: &Dataset, config: &AdamConfig, init: CannWeights) -> Result<TrainingRecord> {
    train_cann_observed(dataset, config, init, |_, _| {})
}

/// As [`train_cann_from`], calling `on_step(epoch, weights)` with the
/// projected weights after every step.
pub fn train_cann_observed(
    dataset: &Dataset,
    config: &AdamConfig,
    init: CannWeights,
    mut on_step: impl FnMut(usize, &CannWeights),
) -> Result<TrainingRecord> {
    require_samples(dataset)?;
    config.validate()?;
    if !init.is_feasible() {
        return Err(CannError::Domain("initial weights must be finite and non-negative".into()));
    }

    let scale = parameter_scales(dataset)?;
    let raw = init.to_array();
    let mut theta: [f64; N_PARAMS] = std::array::from_fn(|k| raw[k] * scale[k]);
    let to_weights = |theta: &[f64; N_PARAMS]| CannWeights::from_array(&std::array::from_fn(|k| theta[k] / scale[k]));
    let mut adam = Adam::new(*config, N_PARAMS);
    let mut history = Vec::with_capacity(config.epochs);
    let mut best = (f64::INFINITY, 0, init);

    for epoch in 1..=config.epochs {
        let w = to_weights(&theta);
        let (loss, grad) = loss_and_gradient(&w, dataset)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(CannError::Divergence { epoch, loss });
        }
        if loss < best.0 {
            best = (loss, epoch, w);
        }
        history.push(loss);
        let scaled_grad: [f64; N_PARAMS] = std::array::from_fn(|k| grad[k] / scale[k]);
        adam.step(&mut theta, &scaled_grad);
        for x in theta.iter_mut() {
            *x = x.max(0.0);
        }
        on_step(epoch, &to_weights(&theta));
    }

    let last = to_weights(&theta);
    let last_loss = mse_loss(&last, dataset)?;
    if !last_loss.is_finite() {
        return Err(CannError::Divergence { epoch: config.epochs + 1, loss: last_loss });
    }
    if last_loss < best.0 {
        best = (last_loss, config.epochs + 1, last);
    }
    let (final_loss, best_epoch, final_weights) = best;
    Ok(TrainingRecord {
        final_weights,
        best_epoch,
        epochs_run: history.len(),
        loss_history: history,
        final_loss,
        config: *config,
    })
}
