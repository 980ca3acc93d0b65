//! Shallow neural network: one rectified-linear hidden layer of 32
//! units and a logistic output, trained on unweighted log-loss with
//! full-batch adaptive-moment updates (lr 0.01, up to 2000 iterations).
//!
//! Initialization is seeded and every update is an ordered f64
//! computation, so a (data, config, seed) triple always yields the same
//! weights.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, ModelParams, ModelVariant, TrainSet, TrainingMetadata, TransferModel, FEATURE_SCALE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Adam moment decay rates and epsilon.
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Stop after the loss improves by less than this for
    /// `plateau_patience` consecutive iterations.
    pub plateau_tolerance: f64,
    pub plateau_patience: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden_units: 32,
            learning_rate: 0.01,
            max_iterations: 2000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            plateau_tolerance: 1e-10,
            plateau_patience: 10,
        }
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], config: &MlpConfig) {
        self.t += 1;
        let bias1 = 1.0 - config.beta1.powi(self.t);
        let bias2 = 1.0 - config.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = config.beta1 * self.m[i] + (1.0 - config.beta1) * grads[i];
            self.v[i] = config.beta2 * self.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            params[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
        }
    }
}

pub fn fit_mlp(train: &TrainSet, config: &MlpConfig, seed: u64) -> Result<TransferModel> {
    if config.hidden_units == 0 {
        return Err(Error::Config("hidden_units must be positive".into()));
    }
    let dim = train.validate(2)?;
    let x = train.scaled();
    let n = x.len();
    let h = config.hidden_units;
    let y: Vec<f64> = train.labels.iter().map(|&l| l as f64).collect();

    // Glorot-uniform init, biases zero.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit1 = (6.0 / (dim + h) as f64).sqrt();
    let limit2 = (6.0 / (h + 1) as f64).sqrt();
    // Flat parameter vector: [w1 (h x dim) | b1 (h) | w2 (h) | b2 (1)]
    let mut params = vec![0.0; h * dim + h + h + 1];
    for p in params.iter_mut().take(h * dim) {
        *p = rng.random_range(-limit1..limit1);
    }
    for i in 0..h {
        params[h * dim + h + i] = rng.random_range(-limit2..limit2);
    }

    let w1 = |params: &[f64], unit: usize| -> std::ops::Range<usize> {
        let _ = params;
        unit * dim..(unit + 1) * dim
    };
    let b1_at = h * dim;
    let w2_at = h * dim + h;
    let b2_at = h * dim + h + h;

    let mut adam = Adam::new(params.len());
    let mut grads = vec![0.0; params.len()];
    let mut hidden = vec![0.0; h];
    let mut loss_trace: Vec<f64> = Vec::with_capacity(config.max_iterations);
    let mut plateau = 0usize;

    for _ in 0..config.max_iterations {
        grads.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;

        for (row, &target) in x.iter().zip(&y) {
            // Forward.
            for unit in 0..h {
                let range = w1(&params, unit);
                let a: f64 = params[range]
                    .iter()
                    .zip(row)
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
                    + params[b1_at + unit];
                hidden[unit] = if a > 0.0 { a } else { 0.0 };
            }
            let z: f64 = (0..h).map(|u| params[w2_at + u] * hidden[u]).sum::<f64>()
                + params[b2_at];
            let p = sigmoid(z);
            // Stable log-loss via the logit.
            loss += if z >= 0.0 {
                (1.0 - target) * z + (-z).exp().ln_1p()
            } else {
                -target * z + z.exp().ln_1p()
            };

            // Backward.
            let dz = p - target;
            grads[b2_at] += dz;
            for unit in 0..h {
                grads[w2_at + unit] += dz * hidden[unit];
                if hidden[unit] > 0.0 {
                    let da = dz * params[w2_at + unit];
                    grads[b1_at + unit] += da;
                    let range = w1(&params, unit);
                    for (g, v) in grads[range].iter_mut().zip(row) {
                        *g += da * v;
                    }
                }
            }
        }

        let scale = 1.0 / n as f64;
        loss *= scale;
        grads.iter_mut().for_each(|g| *g *= scale);

        if !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite loss at iteration {} (trace tail: {:?})",
                loss_trace.len(),
                &loss_trace[loss_trace.len().saturating_sub(5)..]
            )));
        }
        if let Some(&previous) = loss_trace.last() {
            if (previous - loss).abs() < config.plateau_tolerance {
                plateau += 1;
            } else {
                plateau = 0;
            }
        }
        loss_trace.push(loss);
        if plateau >= config.plateau_patience {
            break;
        }

        adam.step(&mut params, &grads, config);
    }

    let hidden_weights: Vec<Vec<f64>> = (0..h)
        .map(|unit| params[unit * dim..(unit + 1) * dim].to_vec())
        .collect();
    let hidden_bias = params[b1_at..b1_at + h].to_vec();
    let output_weights = params[w2_at..w2_at + h].to_vec();
    let output_bias = params[b2_at];

    Ok(TransferModel {
        variant: ModelVariant::Mlp,
        params: ModelParams::Mlp {
            hidden_weights,
            hidden_bias,
            output_weights,
            output_bias,
        },
        input_dim: dim,
        seed,
        feature_scale: FEATURE_SCALE,
        training_metadata: TrainingMetadata {
            train_language: train.language.clone(),
            sample_count: n,
            hyperparameters: format!(
                "hidden_units={},learning_rate={},max_iterations={}",
                config.hidden_units, config.learning_rate, config.max_iterations
            ),
            loss_trace: Some(loss_trace),
        },
        ucs_checksum: train.ucs_checksum.clone(),
    })
}
