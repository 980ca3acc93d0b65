//! Instance-based prediction: majority vote of the k = 5
//! Euclidean-nearest training samples, with the vote fraction as the
//! probability. Distance ties resolve to the lower row, which callers
//! keep in ascending sample-id order.

use serde::{Deserialize, Serialize};

use super::{ModelParams, ModelVariant, TrainSet, TrainingMetadata, TransferModel, FEATURE_SCALE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

pub fn fit_knn(train: &TrainSet, config: &KnnConfig, seed: u64) -> Result<TransferModel> {
    if config.k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    let dim = train.validate(0)?;
    if train.features.len() < config.k {
        return Err(Error::Training(format!(
            "need at least k = {} training samples, got {}",
            config.k,
            train.features.len()
        )));
    }
    Ok(TransferModel {
        variant: ModelVariant::Knn,
        params: ModelParams::Knn {
            k: config.k,
            features: train.scaled(),
            labels: train.labels.clone(),
        },
        input_dim: dim,
        seed,
        feature_scale: FEATURE_SCALE,
        training_metadata: TrainingMetadata {
            train_language: train.language.clone(),
            sample_count: train.features.len(),
            hyperparameters: format!("k={}", config.k),
            loss_trace: None,
        },
        ucs_checksum: train.ucs_checksum.clone(),
    })
}
