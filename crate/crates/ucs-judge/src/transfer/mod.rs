//! Stage 3: lightweight predictors trained on English concept vectors
//! and applied unchanged to any language, plus the LLM aggregator and
//! the zero-shot judge baseline.
//!
//! All fits are pure functions of `(features, labels, config, seed)`.
//! Features (criterion or concept scores in [0, 10]) are divided by 10
//! before fitting, and identically at prediction time; the scale is
//! stored in the model.

mod forest;
mod knn;
mod logistic;
mod mlp;

pub use forest::{fit_random_forest, forest_importances, ForestConfig, MaxFeatures};
pub use knn::{fit_knn, KnnConfig};
pub use logistic::{fit_logistic, LogisticConfig};
pub use mlp::{fit_mlp, MlpConfig};

use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::criteria::CriteriaSet;
use crate::dataset::{Sample, TaskSpec};
use crate::error::{Error, Result};
use crate::gateway::{CompletionRequest, Gateway};
use crate::prompts;
use crate::scoring::{ConceptVector, CriteriaResponseVector};

/// Scores are divided by this before any fit or prediction.
pub const FEATURE_SCALE: f64 = 10.0;

/// Current model file schema version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    Logreg,
    Mlp,
    Knn,
    RandomForest,
}

impl std::str::FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "logreg" | "logistic" => Ok(ModelVariant::Logreg),
            "mlp" | "nn" => Ok(ModelVariant::Mlp),
            "knn" => Ok(ModelVariant::Knn),
            "random_forest" | "rf" => Ok(ModelVariant::RandomForest),
            other => Err(Error::Config(format!("unknown model variant '{other}'"))),
        }
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ModelVariant::Logreg => "logreg",
            ModelVariant::Mlp => "mlp",
            ModelVariant::Knn => "knn",
            ModelVariant::RandomForest => "random_forest",
        };
        write!(f, "{name}")
    }
}

/// Learned state, one arm per variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Logistic {
        weights: Vec<f64>,
        intercept: f64,
    },
    Mlp {
        hidden_weights: Vec<Vec<f64>>,
        hidden_bias: Vec<f64>,
        output_weights: Vec<f64>,
        output_bias: f64,
    },
    Forest {
        trees: Vec<forest::Tree>,
        importances: Vec<f64>,
    },
    Knn {
        k: usize,
        /// Scaled training features, in the row order given at fit time
        /// (callers supply rows in ascending sample-id order; distance
        /// ties resolve to the lower row).
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub train_language: String,
    pub sample_count: usize,
    pub hyperparameters: String,
    /// Per-iteration loss for iterative variants.
    pub loss_trace: Option<Vec<f64>>,
}

/// A trained lightweight predictor plus everything needed to apply it
/// to new concept vectors: input dimension, feature scale, seed, and
/// the criteria-set checksum it is aligned to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferModel {
    pub variant: ModelVariant,
    pub params: ModelParams,
    pub input_dim: usize,
    pub seed: u64,
    pub feature_scale: f64,
    pub training_metadata: TrainingMetadata,
    pub ucs_checksum: String,
}

/// Where a verdict came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictSource {
    Trained,
    LlmAggregated,
    ZeroShot,
}

/// A binary judgment for one sample. Trained sources always carry a
/// probability; LLM sources may not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub sample_id: String,
    pub probability: Option<f64>,
    pub predicted_label: u8,
    pub source: VerdictSource,
}

/// Labeled feature matrix handed to the fit functions. Features are in
/// the raw score range [0, 10] — criterion level (dim k) or concept
/// level (dim m) — with rows in ascending sample-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSet {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub language: String,
    pub ucs_checksum: String,
}

impl TrainSet {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
        language: impl Into<String>,
        ucs_checksum: impl Into<String>,
    ) -> Self {
        Self {
            features,
            labels,
            language: language.into(),
            ucs_checksum: ucs_checksum.into(),
        }
    }

    pub(crate) fn validate(&self, min_per_class: usize) -> Result<usize> {
        if self.features.is_empty() {
            return Err(Error::Training("empty training set".into()));
        }
        if self.features.len() != self.labels.len() {
            return Err(Error::Training(format!(
                "{} feature rows but {} labels",
                self.features.len(),
                self.labels.len()
            )));
        }
        let dim = self.features[0].len();
        if dim == 0 {
            return Err(Error::Training("zero-dimensional features".into()));
        }
        for row in &self.features {
            if row.len() != dim {
                return Err(Error::Training("ragged feature rows".into()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Training("non-finite value in features".into()));
            }
        }
        if min_per_class > 0 {
            let pos = self.labels.iter().filter(|&&y| y == 1).count();
            let neg = self.labels.len() - pos;
            if pos < min_per_class || neg < min_per_class {
                return Err(Error::Training(format!(
                    "need at least {min_per_class} samples per class, got {pos} positive / {neg} negative"
                )));
            }
        }
        Ok(dim)
    }

    /// Features divided by [`FEATURE_SCALE`].
    pub(crate) fn scaled(&self) -> Vec<Vec<f64>> {
        self.features
            .iter()
            .map(|row| row.iter().map(|v| v / FEATURE_SCALE).collect())
            .collect()
    }
}

/// Balanced class weight for each sample: `N / (2 * N_class)`.
pub(crate) fn balanced_weights(labels: &[u8]) -> Vec<f64> {
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|&&y| y == 1).count() as f64;
    let neg = n - pos;
    labels
        .iter()
        .map(|&y| if y == 1 { n / (2.0 * pos) } else { n / (2.0 * neg) })
        .collect()
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl TransferModel {
    /// Positive-class probability for one raw (unscaled) feature row.
    pub fn predict_proba_raw(&self, features_raw: &[f64]) -> Result<f64> {
        if features_raw.len() != self.input_dim {
            return Err(Error::Alignment(format!(
                "feature dim {} does not match model input dim {}",
                features_raw.len(),
                self.input_dim
            )));
        }
        if features_raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::Training("non-finite value in features".into()));
        }
        let x: Vec<f64> = features_raw
            .iter()
            .map(|v| v / self.feature_scale)
            .collect();
        let p = match &self.params {
            ModelParams::Logistic { weights, intercept } => {
                let z: f64 = weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + intercept;
                sigmoid(z)
            }
            ModelParams::Mlp {
                hidden_weights,
                hidden_bias,
                output_weights,
                output_bias,
            } => {
                let mut z = *output_bias;
                for (unit, (w_row, b)) in hidden_weights.iter().zip(hidden_bias).enumerate() {
                    let a: f64 = w_row.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + b;
                    if a > 0.0 {
                        z += output_weights[unit] * a;
                    }
                }
                sigmoid(z)
            }
            ModelParams::Forest { trees, .. } => {
                let sum: f64 = trees.iter().map(|t| t.predict_proba(&x)).sum();
                sum / trees.len() as f64
            }
            ModelParams::Knn { k, features, labels } => {
                let mut order: Vec<usize> = (0..features.len()).collect();
                let dist = |i: usize| -> f64 {
                    features[i]
                        .iter()
                        .zip(&x)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                };
                // Ties resolve to the lower row (ascending sample-id order).
                order.sort_by(|&a, &b| {
                    dist(a).partial_cmp(&dist(b)).unwrap().then(a.cmp(&b))
                });
                let votes = order
                    .iter()
                    .take(*k)
                    .filter(|&&i| labels[i] == 1)
                    .count();
                votes as f64 / *k as f64
            }
        };
        Ok(p)
    }

    /// Apply the model to a concept vector. The vector's checksum must
    /// match the criteria set the model was trained under; language is
    /// not consulted (concept vectors carry none).
    pub fn predict(&self, vector: &ConceptVector) -> Result<Verdict> {
        if vector.ucs_checksum != self.ucs_checksum {
            return Err(Error::Alignment(format!(
                "vector for '{}' carries checksum {} but the model was trained under {}",
                vector.sample_id, vector.ucs_checksum, self.ucs_checksum
            )));
        }
        let probability = self.predict_proba_raw(&vector.values)?;
        Ok(Verdict {
            sample_id: vector.sample_id.clone(),
            probability: Some(probability),
            predicted_label: label_from_probability(probability),
            source: VerdictSource::Trained,
        })
    }
}

/// Decision threshold 0.5; an exact tie goes to label 1.
pub fn label_from_probability(probability: f64) -> u8 {
    if probability >= 0.5 {
        1
    } else {
        0
    }
}

// ─── Persistence ─────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    #[serde(flatten)]
    model: TransferModel,
}

pub fn save_model(model: &TransferModel, path: impl AsRef<Path>) -> Result<()> {
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    if let Some(parent) = path.as_ref().parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TransferModel> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("model file: {e}")))?;
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Format("model file has no version field".into()))?;
    if version != MODEL_FORMAT_VERSION as u64 {
        return Err(Error::Version(format!(
            "model file version {version} not supported (expected {MODEL_FORMAT_VERSION})"
        )));
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| Error::Format(format!("model file: {e}")))?;
    Ok(file.model)
}

// ─── LLM aggregator and zero-shot baseline ───────────────────────────

/// Parse a binary judgment from completion text: a
/// `<judgment>yes|no</judgment>` tag, else a lone unambiguous yes/no
/// word. Both present or neither present is unparseable.
pub fn parse_binary_judgment(text: &str) -> Option<u8> {
    let tag_re = Regex::new(r"(?is)<judgment>\s*(yes|no)\s*</judgment>").expect("static regex");
    if let Some(caps) = tag_re.captures(text) {
        return Some(if caps[1].eq_ignore_ascii_case("yes") { 1 } else { 0 });
    }
    let word_re = Regex::new(r"(?i)\b(yes|no)\b").expect("static regex");
    let mut saw_yes = false;
    let mut saw_no = false;
    for caps in word_re.captures_iter(text) {
        if caps[1].eq_ignore_ascii_case("yes") {
            saw_yes = true;
        } else {
            saw_no = true;
        }
    }
    match (saw_yes, saw_no) {
        (true, false) => Some(1),
        (false, true) => Some(0),
        _ => None,
    }
}

fn judged_call(
    gateway: &Gateway,
    model_id: &str,
    system: &str,
    user: &str,
) -> Result<u8> {
    let first = gateway.complete(&CompletionRequest::new(model_id, system, user))?;
    if let Some(label) = parse_binary_judgment(&first.text) {
        return Ok(label);
    }
    let second = gateway.complete(&CompletionRequest::new(
        model_id,
        system,
        format!("{user}{}", prompts::REPAIR_INSTRUCTION),
    ))?;
    parse_binary_judgment(&second.text).ok_or(Error::Judgment { raw: second.text })
}

/// Training-free aggregation: one call rendering the sample text
/// (unless `include_sample_text` is off), every criterion question, and
/// its criterion-level score, parsed into a binary judgment.
pub fn llm_aggregate(
    sample: &Sample,
    task: &TaskSpec,
    ucs: &CriteriaSet,
    response_vector: &CriteriaResponseVector,
    gateway: &Gateway,
    model_id: &str,
    include_sample_text: bool,
) -> Result<Verdict> {
    if response_vector.ucs_checksum != ucs.checksum {
        return Err(Error::Alignment(format!(
            "response vector carries checksum {} but the criteria set has {}",
            response_vector.ucs_checksum, ucs.checksum
        )));
    }
    if response_vector.scores.len() != ucs.criterion_count() {
        return Err(Error::Alignment(format!(
            "response vector length {} != criterion count {}",
            response_vector.scores.len(),
            ucs.criterion_count()
        )));
    }
    let entries: Vec<(String, f64)> = ucs
        .criteria
        .iter()
        .zip(&response_vector.scores)
        .map(|(c, &z)| (c.question.clone(), z))
        .collect();
    let fields: Vec<(String, String)> = task
        .field_roles
        .iter()
        .filter_map(|role| sample.fields.get(role).map(|t| (role.clone(), t.clone())))
        .collect();
    let (system, user) = prompts::aggregator(
        task.prompt_family,
        include_sample_text.then_some(fields.as_slice()),
        &entries,
    );
    let label = judged_call(gateway, model_id, &system, &user)?;
    Ok(Verdict {
        sample_id: sample.id.clone(),
        probability: None,
        predicted_label: label,
        source: VerdictSource::LlmAggregated,
    })
}

/// The unstructured baseline: one direct judgment call per sample.
pub fn zero_shot_judge(
    sample: &Sample,
    task: &TaskSpec,
    gateway: &Gateway,
    model_id: &str,
) -> Result<Verdict> {
    let fields: Vec<(String, String)> = task
        .field_roles
        .iter()
        .filter_map(|role| sample.fields.get(role).map(|t| (role.clone(), t.clone())))
        .collect();
    let (system, user) = prompts::zero_shot(task.prompt_family, &fields);
    let label = judged_call(gateway, model_id, &system, &user)?;
    Ok(Verdict {
        sample_id: sample.id.clone(),
        probability: None,
        predicted_label: label,
        source: VerdictSource::ZeroShot,
    })
}

/// Dispatch a fit by variant with each variant's default
/// hyperparameters.
pub fn fit(variant: ModelVariant, train: &TrainSet, seed: u64) -> Result<TransferModel> {
    match variant {
        ModelVariant::Logreg => fit_logistic(train, &LogisticConfig::default(), seed),
        ModelVariant::Mlp => fit_mlp(train, &MlpConfig::default(), seed),
        ModelVariant::Knn => fit_knn(train, &KnnConfig::default(), seed),
        ModelVariant::RandomForest => fit_random_forest(train, &ForestConfig::default(), seed),
    }
}

#[cfg(test)]
mod tests;
