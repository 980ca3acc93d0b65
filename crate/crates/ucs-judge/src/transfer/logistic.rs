//! L2-regularized logistic regression with balanced class weights,
//! fitted by deterministic full-batch gradient descent.
//!
//! Objective (intercept unpenalized):
//!
//! ```text
//! J(w, b) = 0.5 ||w||^2 + C * sum_i cw_i * log(1 + exp(-y~_i (w.x_i + b)))
//! ```
//!
//! with `y~ in {-1, +1}` and balanced weights `cw_i = N / (2 N_class)`.
//! The step size is `1/L` for a Lipschitz bound L on the gradient, so
//! the descent is monotone and needs no tuning.

use serde::{Deserialize, Serialize};

use super::{balanced_weights, sigmoid, ModelParams, ModelVariant, TrainSet, TrainingMetadata, TransferModel, FEATURE_SCALE};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub max_iterations: usize,
    /// Stop when the gradient norm falls below this.
    pub tolerance: f64,
    pub balanced_class_weights: bool,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            c: 0.1,
            max_iterations: 2000,
            tolerance: 1e-6,
            balanced_class_weights: true,
        }
    }
}

pub fn fit_logistic(train: &TrainSet, config: &LogisticConfig, seed: u64) -> Result<TransferModel> {
    let dim = train.validate(2)?;
    let x = train.scaled();
    let n = x.len();
    let signs: Vec<f64> = train
        .labels
        .iter()
        .map(|&y| if y == 1 { 1.0 } else { -1.0 })
        .collect();
    let weights_per_sample = if config.balanced_class_weights {
        balanced_weights(&train.labels)
    } else {
        vec![1.0; n]
    };

    // Lipschitz bound: penalty Hessian is I; each sample contributes at
    // most 0.25 * C * cw_i * (||x_i||^2 + 1) including the intercept.
    let mut lipschitz = 1.0;
    for (row, cw) in x.iter().zip(&weights_per_sample) {
        let norm_sq: f64 = row.iter().map(|v| v * v).sum();
        lipschitz += 0.25 * config.c * cw * (norm_sq + 1.0);
    }
    let step = 1.0 / lipschitz;

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut loss_trace = Vec::with_capacity(config.max_iterations);

    for _ in 0..config.max_iterations {
        let mut grad_w = w.clone();
        let mut grad_b = 0.0;
        let mut loss = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        for ((row, &sign), &cw) in x.iter().zip(&signs).zip(&weights_per_sample) {
            let z: f64 = w.iter().zip(row).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            let margin = sign * z;
            // log(1 + exp(-m)) computed stably.
            loss += config.c
                * cw
                * if margin > 0.0 {
                    (-margin).exp().ln_1p()
                } else {
                    -margin + margin.exp().ln_1p()
                };
            let g = config.c * cw * (-sign) * sigmoid(-margin);
            for (gw, xi) in grad_w.iter_mut().zip(row) {
                *gw += g * xi;
            }
            grad_b += g;
        }
        loss_trace.push(loss);

        let grad_norm =
            (grad_w.iter().map(|v| v * v).sum::<f64>() + grad_b * grad_b).sqrt();
        if grad_norm < config.tolerance {
            break;
        }
        for (wi, gw) in w.iter_mut().zip(&grad_w) {
            *wi -= step * gw;
        }
        b -= step * grad_b;
    }

    Ok(TransferModel {
        variant: ModelVariant::Logreg,
        params: ModelParams::Logistic {
            weights: w,
            intercept: b,
        },
        input_dim: dim,
        seed,
        feature_scale: FEATURE_SCALE,
        training_metadata: TrainingMetadata {
            train_language: train.language.clone(),
            sample_count: n,
            hyperparameters: format!(
                "C={},max_iterations={},tolerance={},balanced_class_weights={}",
                config.c, config.max_iterations, config.tolerance, config.balanced_class_weights
            ),
            loss_trace: Some(loss_trace),
        },
        ucs_checksum: train.ucs_checksum.clone(),
    })
}
