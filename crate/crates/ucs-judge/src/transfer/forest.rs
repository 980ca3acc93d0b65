//! Random forest: bagged CART trees with the Gini split criterion,
//! class-weighted impurity, √d feature subsets per split, and
//! normalized Gini feature importances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{balanced_weights, ModelParams, ModelVariant, TrainSet, TrainingMetadata, TransferModel, FEATURE_SCALE};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// floor(sqrt(d)), at least 1.
    Sqrt,
    /// Every feature considered at every split.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
    pub balanced_class_weights: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 10,
            min_samples_split: 2,
            bootstrap: true,
            max_features: MaxFeatures::Sqrt,
            balanced_class_weights: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        probability: f64,
    },
}

/// One CART tree over an arena of nodes; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { probability } => return *probability,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    labels: &'a [u8],
    weights: &'a [f64],
    dim: usize,
    config: &'a ForestConfig,
    nodes: Vec<Node>,
    importances: Vec<f64>,
    root_weight: f64,
}

struct NodeStats {
    weight: f64,
    pos_weight: f64,
}

fn gini(stats: &NodeStats) -> f64 {
    if stats.weight <= 0.0 {
        return 0.0;
    }
    let p = stats.pos_weight / stats.weight;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

impl<'a> TreeBuilder<'a> {
    fn stats(&self, indices: &[usize]) -> NodeStats {
        let mut weight = 0.0;
        let mut pos_weight = 0.0;
        for &i in indices {
            weight += self.weights[i];
            if self.labels[i] == 1 {
                pos_weight += self.weights[i];
            }
        }
        NodeStats { weight, pos_weight }
    }

    fn leaf(&mut self, stats: &NodeStats) -> usize {
        let probability = if stats.weight > 0.0 {
            stats.pos_weight / stats.weight
        } else {
            0.5
        };
        self.nodes.push(Node::Leaf { probability });
        self.nodes.len() - 1
    }

    // Candidates come back in a random order and the first best split
    // wins, so equal-gain features (e.g. duplicated columns) share
    // selections across nodes instead of always losing to the lower
    // index.
    fn candidate_features(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let count = match self.config.max_features {
            MaxFeatures::All => self.dim,
            MaxFeatures::Sqrt => ((self.dim as f64).sqrt() as usize).max(1),
        };
        let mut pool: Vec<usize> = (0..self.dim).collect();
        for i in 0..count.min(self.dim.saturating_sub(1)) {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }

    fn build(&mut self, indices: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let stats = self.stats(&indices);
        let parent_gini = gini(&stats);
        let pure = stats.pos_weight == 0.0 || stats.pos_weight == stats.weight;
        if depth >= self.config.max_depth
            || indices.len() < self.config.min_samples_split
            || pure
        {
            return self.leaf(&stats);
        }

        let mut best: Option<(f64, usize, f64)> = None; // (decrease, feature, threshold)
        for &feature in &self.candidate_features(rng) {
            let mut order: Vec<usize> = indices.clone();
            order.sort_by(|&a, &b| {
                self.x[a][feature]
                    .partial_cmp(&self.x[b][feature])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut left = NodeStats { weight: 0.0, pos_weight: 0.0 };
            for window in 0..order.len() - 1 {
                let i = order[window];
                left.weight += self.weights[i];
                if self.labels[i] == 1 {
                    left.pos_weight += self.weights[i];
                }
                let value = self.x[i][feature];
                let next = self.x[order[window + 1]][feature];
                if value == next {
                    continue;
                }
                let right = NodeStats {
                    weight: stats.weight - left.weight,
                    pos_weight: stats.pos_weight - left.pos_weight,
                };
                let decrease = parent_gini
                    - (left.weight / stats.weight) * gini(&left)
                    - (right.weight / stats.weight) * gini(&right);
                if best.map_or(decrease > 1e-15, |(d, _, _)| decrease > d) {
                    best = Some((decrease, feature, (value + next) / 2.0));
                }
            }
        }

        let Some((decrease, feature, threshold)) = best else {
            return self.leaf(&stats);
        };
        self.importances[feature] += (stats.weight / self.root_weight) * decrease;

        let (left_indices, right_indices): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.x[i][feature] <= threshold);
        let placeholder = self.nodes.len();
        self.nodes.push(Node::Leaf { probability: 0.5 });
        let left = self.build(left_indices, depth + 1, rng);
        let right = self.build(right_indices, depth + 1, rng);
        self.nodes[placeholder] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        placeholder
    }
}

fn tree_rng(seed: u64, tree_index: u64) -> ChaCha8Rng {
    let mut s = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(tree_index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    s ^= s >> 33;
    s = s.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    s ^= s >> 33;
    ChaCha8Rng::seed_from_u64(s)
}

pub fn fit_random_forest(
    train: &TrainSet,
    config: &ForestConfig,
    seed: u64,
) -> Result<TransferModel> {
    let dim = train.validate(2)?;
    let x = train.scaled();
    let n = x.len();
    let class_weights = if config.balanced_class_weights {
        balanced_weights(&train.labels)
    } else {
        vec![1.0; n]
    };

    let mut trees = Vec::with_capacity(config.n_trees);
    let mut importance_sum = vec![0.0; dim];
    for t in 0..config.n_trees {
        let mut rng = tree_rng(seed, t as u64);
        // Bootstrap as multiplicity-scaled weights over distinct rows.
        let mut weights = vec![0.0; n];
        let indices: Vec<usize> = if config.bootstrap {
            let mut seen = Vec::new();
            let mut counts = vec![0usize; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1;
            }
            for (i, &count) in counts.iter().enumerate() {
                if count > 0 {
                    weights[i] = class_weights[i] * count as f64;
                    seen.push(i);
                }
            }
            seen
        } else {
            weights.copy_from_slice(&class_weights);
            (0..n).collect()
        };

        let root_weight: f64 = indices.iter().map(|&i| weights[i]).sum();
        let mut builder = TreeBuilder {
            x: &x,
            labels: &train.labels,
            weights: &weights,
            dim,
            config,
            nodes: Vec::new(),
            importances: vec![0.0; dim],
            root_weight,
        };
        builder.build(indices, 0, &mut rng);

        let total: f64 = builder.importances.iter().sum();
        if total > 0.0 {
            for (acc, imp) in importance_sum.iter_mut().zip(&builder.importances) {
                *acc += imp / total;
            }
        }
        trees.push(Tree {
            nodes: builder.nodes,
        });
    }

    let total: f64 = importance_sum.iter().sum();
    let importances: Vec<f64> = if total > 0.0 {
        importance_sum.iter().map(|v| v / total).collect()
    } else {
        // No tree found any useful split (constant features).
        vec![1.0 / dim as f64; dim]
    };

    Ok(TransferModel {
        variant: ModelVariant::RandomForest,
        params: ModelParams::Forest { trees, importances },
        input_dim: dim,
        seed,
        feature_scale: FEATURE_SCALE,
        training_metadata: TrainingMetadata {
            train_language: train.language.clone(),
            sample_count: n,
            hyperparameters: format!(
                "n_trees={},max_depth={},bootstrap={},max_features={:?},balanced_class_weights={}",
                config.n_trees,
                config.max_depth,
                config.bootstrap,
                config.max_features,
                config.balanced_class_weights
            ),
            loss_trace: None,
        },
        ucs_checksum: train.ucs_checksum.clone(),
    })
}

/// Normalized Gini importances of a fitted forest model.
pub fn forest_importances(model: &TransferModel) -> Option<&[f64]> {
    match &model.params {
        ModelParams::Forest { importances, .. } => Some(importances),
        _ => None,
    }
}
