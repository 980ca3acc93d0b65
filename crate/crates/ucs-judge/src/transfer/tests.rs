use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::criteria::{build_ucs, Concept, Criterion, GenerationMetadata, GenerationMode};
use crate::dataset::PromptFamily;
use crate::gateway::MockBackend;
use crate::scoring::ScoreStatus;

fn accuracy(labels: &[u8], predictions: &[u8]) -> f64 {
    let hits = labels
        .iter()
        .zip(predictions)
        .filter(|(a, b)| a == b)
        .count();
    hits as f64 / labels.len() as f64
}

fn balanced_acc(labels: &[u8], predictions: &[u8]) -> f64 {
    let mut recall = [0.0; 2];
    for class in 0..2u8 {
        let total = labels.iter().filter(|&&y| y == class).count();
        let hit = labels
            .iter()
            .zip(predictions)
            .filter(|(&y, &p)| y == class && p == class)
            .count();
        recall[class as usize] = hit as f64 / total as f64;
    }
    (recall[0] + recall[1]) / 2.0
}

fn train_predictions(model: &TransferModel, features: &[Vec<f64>]) -> Vec<u8> {
    features
        .iter()
        .map(|row| label_from_probability(model.predict_proba_raw(row).unwrap()))
        .collect()
}

/// Negatives have feature 0 in [0, 5.5], positives in [6.5, 10]; the
/// remaining features are noise. Margin >= 1 around the boundary at 6.
fn separable_set(n_per_class: usize, seed: u64) -> TrainSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n_per_class {
        features.push(vec![
            rng.random_range(0.0..5.5),
            rng.random_range(0.0..10.0),
            rng.random_range(0.0..10.0),
        ]);
        labels.push(0);
        features.push(vec![
            rng.random_range(6.5..10.0),
            rng.random_range(0.0..10.0),
            rng.random_range(0.0..10.0),
        ]);
        labels.push(1);
    }
    TrainSet::new(features, labels, "en", "checksum")
}

#[test]
fn logistic_reaches_full_accuracy_on_separable_data() {
    let train = separable_set(40, 7);

    // Oracle: exhaustive threshold check on feature 0 confirms the data
    // is linearly separable, so a consistent linear learner must reach
    // training accuracy 1.0.
    let mut neg_max = f64::NEG_INFINITY;
    let mut pos_min = f64::INFINITY;
    for (row, &y) in train.features.iter().zip(&train.labels) {
        if y == 1 {
            pos_min = pos_min.min(row[0]);
        } else {
            neg_max = neg_max.max(row[0]);
        }
    }
    assert!(
        neg_max < pos_min && pos_min - neg_max >= 1.0,
        "construction broke separability"
    );

    let model = fit_logistic(&train, &LogisticConfig::default(), 42).unwrap();
    let predictions = train_predictions(&model, &train.features);
    assert_eq!(accuracy(&train.labels, &predictions), 1.0);
}

#[test]
fn logistic_rejects_single_class() {
    let features = vec![vec![1.0, 2.0]; 10];
    let labels = vec![1u8; 10];
    let train = TrainSet::new(features, labels, "en", "checksum");
    assert!(matches!(
        fit_logistic(&train, &LogisticConfig::default(), 42),
        Err(Error::Training(_))
    ));
}

#[test]
fn logistic_rejects_nan_features() {
    let features = vec![vec![1.0, f64::NAN], vec![2.0, 3.0], vec![1.0, 1.0], vec![2.0, 2.0]];
    let labels = vec![0, 1, 0, 1];
    let train = TrainSet::new(features, labels, "en", "checksum");
    assert!(matches!(
        fit_logistic(&train, &LogisticConfig::default(), 42),
        Err(Error::Training(_))
    ));
}

#[test]
fn logistic_symmetry_maps_midpoint_to_half() {
    // Class-symmetric construction: for every (s, y) the mirrored
    // (10 - s, 1 - y) is present, so the optimum satisfies
    // p(10 - s) = 1 - p(s). In scaled coordinates this forces
    // sum(w) + 2b = 0 and p(midpoint) = 0.5.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..60 {
        let row: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..10.0)).collect();
        let label = u8::from(row[0] > 5.0);
        let mirrored: Vec<f64> = row.iter().map(|v| 10.0 - v).collect();
        features.push(row);
        labels.push(label);
        features.push(mirrored);
        labels.push(1 - label);
    }
    let train = TrainSet::new(features, labels, "en", "checksum");
    let model = fit_logistic(&train, &LogisticConfig::default(), 42).unwrap();
    let ModelParams::Logistic { weights, intercept } = &model.params else {
        panic!("wrong params kind");
    };
    // The residual decays with the gradient tolerance (1e-6), not to
    // machine precision: the mirror map is not an isometry, so descent
    // only lands on the symmetric subspace at the optimum.
    let anti = weights.iter().sum::<f64>() + 2.0 * intercept;
    assert!(anti.abs() < 1e-4, "sum(w) + 2b = {anti}");
    let p_mid = model.predict_proba_raw(&[5.0, 5.0, 5.0, 5.0]).unwrap();
    assert!((p_mid - 0.5).abs() < 1e-5, "p(midpoint) = {p_mid}");
}

/// Label 1 iff exactly one of the first two features exceeds 5; values
/// avoid the (4.5, 5.5) band so the pattern has a margin.
fn xor_set(n: usize, seed: u64) -> TrainSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut draw = |rng: &mut ChaCha8Rng| -> f64 {
        let v: f64 = rng.random_range(0.0..9.0);
        if v < 4.5 {
            v
        } else {
            v + 1.0
        }
    };
    for _ in 0..n {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        labels.push(u8::from((a > 5.0) ^ (b > 5.0)));
        features.push(vec![a, b]);
    }
    TrainSet::new(features, labels, "en", "checksum")
}

#[test]
fn mlp_learns_xor_pattern() {
    let train = xor_set(400, 11);

    // Oracle: leave-one-out nearest neighbor reaches >= 0.95 on the
    // same data, establishing that the pattern is learnable.
    let scaled = train.scaled();
    let mut loo_predictions = Vec::new();
    for i in 0..scaled.len() {
        let mut best = (f64::INFINITY, 0usize);
        for j in 0..scaled.len() {
            if i == j {
                continue;
            }
            let d: f64 = scaled[i]
                .iter()
                .zip(&scaled[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d < best.0 {
                best = (d, j);
            }
        }
        loo_predictions.push(train.labels[best.1]);
    }
    let oracle_ba = balanced_acc(&train.labels, &loo_predictions);
    assert!(oracle_ba >= 0.95, "1-NN oracle BA {oracle_ba}");

    let model = fit_mlp(&train, &MlpConfig::default(), 42).unwrap();
    let predictions = train_predictions(&model, &train.features);
    let ba = balanced_acc(&train.labels, &predictions);
    assert!(ba >= 0.95, "MLP training BA {ba}");
}

#[test]
fn mlp_is_deterministic_per_seed() {
    let train = xor_set(80, 5);
    let a = fit_mlp(&train, &MlpConfig::default(), 42).unwrap();
    let b = fit_mlp(&train, &MlpConfig::default(), 42).unwrap();
    assert_eq!(a, b);
    let c = fit_mlp(&train, &MlpConfig::default(), 43).unwrap();
    assert_ne!(a.params, c.params);
}

#[test]
fn mlp_rejects_zero_hidden_units() {
    let train = xor_set(40, 5);
    let config = MlpConfig {
        hidden_units: 0,
        ..MlpConfig::default()
    };
    assert!(matches!(
        fit_mlp(&train, &config, 42),
        Err(Error::Config(_))
    ));
}

#[test]
fn forest_single_feature_takes_all_importance() {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for i in 0..20 {
        let v = i as f64 / 2.0;
        features.push(vec![v]);
        labels.push(u8::from(v > 5.0));
    }
    let train = TrainSet::new(features, labels, "en", "checksum");
    let model = fit_random_forest(&train, &ForestConfig::default(), 42).unwrap();
    assert_eq!(forest_importances(&model).unwrap(), &[1.0]);
}

#[test]
fn forest_duplicate_feature_splits_importance() {
    // All features considered at every split, so the comparison is not
    // skewed by the size of random feature subsets. 10% label noise
    // keeps deeper splits alive.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut single_features = Vec::new();
    let mut double_features = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..300 {
        let informative: f64 = rng.random_range(0.0..10.0);
        let noise1: f64 = rng.random_range(0.0..10.0);
        let noise2: f64 = rng.random_range(0.0..10.0);
        let flip: f64 = rng.random_range(0.0..1.0);
        labels.push(u8::from((informative > 5.0) ^ (flip < 0.1)));
        single_features.push(vec![informative, noise1, noise2]);
        double_features.push(vec![informative, informative, noise1, noise2]);
    }
    let config = ForestConfig {
        max_features: MaxFeatures::All,
        ..ForestConfig::default()
    };
    let single = TrainSet::new(single_features, labels.clone(), "en", "checksum");
    let double = TrainSet::new(double_features, labels, "en", "checksum");
    let single_model = fit_random_forest(&single, &config, 42).unwrap();
    let double_model = fit_random_forest(&double, &config, 42).unwrap();
    let single_imp = forest_importances(&single_model).unwrap()[0];
    let double_imp = forest_importances(&double_model).unwrap();
    let pair = double_imp[0] + double_imp[1];
    assert!(
        double_imp[0] > 0.05 && double_imp[1] > 0.05,
        "importance not split between copies: {double_imp:?}"
    );
    assert!(
        (pair - single_imp).abs() <= 0.05,
        "pair {pair} vs single {single_imp}"
    );
}

#[test]
fn forest_is_deterministic_per_seed() {
    let train = xor_set(60, 9);
    let a = fit_random_forest(&train, &ForestConfig::default(), 42).unwrap();
    let b = fit_random_forest(&train, &ForestConfig::default(), 42).unwrap();
    assert_eq!(a, b);
}

#[test]
fn forest_importances_normalized() {
    let train = xor_set(100, 21);
    let model = fit_random_forest(&train, &ForestConfig::default(), 42).unwrap();
    let imps = forest_importances(&model).unwrap();
    assert!(imps.iter().all(|&v| v >= 0.0));
    let sum: f64 = imps.iter().sum();
    assert!((sum - 1.0).abs() < 1e-9, "importances sum {sum}");
}

#[test]
fn knn_unanimous_and_split_votes() {
    // Cluster of 5 zeros at one corner, 5 ones at the other.
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for i in 0..5 {
        features.push(vec![0.0 + i as f64 * 0.01, 0.0]);
        labels.push(0);
        features.push(vec![10.0 - i as f64 * 0.01, 10.0]);
        labels.push(1);
    }
    let train = TrainSet::new(features, labels, "en", "checksum");
    let model = fit_knn(&train, &KnnConfig::default(), 42).unwrap();
    let p = model.predict_proba_raw(&[0.0, 0.0]).unwrap();
    assert_eq!(p, 0.0);
    let p = model.predict_proba_raw(&[10.0, 10.0]).unwrap();
    assert_eq!(p, 1.0);

    // 3 ones very close, 2 zeros close, rest far: vote 3-2.
    let features = vec![
        vec![5.0, 5.1],
        vec![5.1, 5.0],
        vec![4.9, 5.0],
        vec![5.0, 4.9],
        vec![5.1, 5.1],
        vec![0.0, 0.0],
        vec![10.0, 10.0],
    ];
    let labels = vec![1, 1, 1, 0, 0, 0, 1];
    let train = TrainSet::new(features, labels, "en", "checksum");
    let model = fit_knn(&train, &KnnConfig::default(), 42).unwrap();
    let p = model.predict_proba_raw(&[5.0, 5.0]).unwrap();
    assert_eq!(p, 0.6);
}

#[test]
fn knn_distance_ties_resolve_to_lower_rows() {
    // Six training points all at distance 1 from the query; the five
    // kept are the lowest rows (ascending sample-id order).
    let features = vec![
        vec![4.0],
        vec![4.0],
        vec![4.0],
        vec![6.0],
        vec![6.0],
        vec![6.0],
    ];
    let labels = vec![0, 0, 0, 1, 1, 1];
    let train = TrainSet::new(features, labels, "en", "checksum");
    let model = fit_knn(&train, &KnnConfig::default(), 42).unwrap();
    // Rows 0..4 win the tie: labels 0,0,0,1,1 -> p = 0.4.
    let p = model.predict_proba_raw(&[5.0]).unwrap();
    assert_eq!(p, 0.4);
}

#[test]
fn knn_requires_k_samples() {
    let features = vec![vec![1.0]; 4];
    let labels = vec![0, 1, 0, 1];
    let train = TrainSet::new(features, labels, "en", "checksum");
    assert!(matches!(
        fit_knn(&train, &KnnConfig::default(), 42),
        Err(Error::Training(_))
    ));
}

#[test]
fn predict_threshold_tie_goes_to_positive() {
    let model = TransferModel {
        variant: ModelVariant::Logreg,
        params: ModelParams::Logistic {
            weights: vec![0.0, 0.0],
            intercept: 0.0,
        },
        input_dim: 2,
        seed: 42,
        feature_scale: FEATURE_SCALE,
        training_metadata: TrainingMetadata {
            train_language: "en".into(),
            sample_count: 0,
            hyperparameters: String::new(),
            loss_trace: None,
        },
        ucs_checksum: "checksum".into(),
    };
    let vector = ConceptVector {
        sample_id: "s".into(),
        ucs_checksum: "checksum".into(),
        values: vec![3.0, 8.0],
    };
    let verdict = model.predict(&vector).unwrap();
    assert_eq!(verdict.probability, Some(0.5));
    assert_eq!(verdict.predicted_label, 1);
}

#[test]
fn predict_is_pure_and_language_blind() {
    let train = separable_set(15, 2);
    let model = fit_logistic(&train, &LogisticConfig::default(), 42).unwrap();
    let a = ConceptVector {
        sample_id: "german-sample".into(),
        ucs_checksum: "checksum".into(),
        values: vec![8.0, 5.0, 5.0],
    };
    let b = ConceptVector {
        sample_id: "hindi-sample".into(),
        ucs_checksum: "checksum".into(),
        values: vec![8.0, 5.0, 5.0],
    };
    let va = model.predict(&a).unwrap();
    let va_again = model.predict(&a).unwrap();
    let vb = model.predict(&b).unwrap();
    assert_eq!(va, va_again);
    assert_eq!(va.probability, vb.probability);
    assert_eq!(va.predicted_label, vb.predicted_label);
}

#[test]
fn predict_rejects_dim_and_checksum_mismatches() {
    let train = separable_set(10, 2);
    let model = fit_logistic(&train, &LogisticConfig::default(), 42).unwrap();
    let short = ConceptVector {
        sample_id: "s".into(),
        ucs_checksum: "checksum".into(),
        values: vec![8.0, 5.0],
    };
    assert!(matches!(model.predict(&short), Err(Error::Alignment(_))));
    let wrong = ConceptVector {
        sample_id: "s".into(),
        ucs_checksum: "other".into(),
        values: vec![8.0, 5.0, 5.0],
    };
    assert!(matches!(model.predict(&wrong), Err(Error::Alignment(_))));
}

#[test]
fn model_round_trip_preserves_predictions_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let train = xor_set(120, 3);
    for variant in [
        ModelVariant::Logreg,
        ModelVariant::Mlp,
        ModelVariant::Knn,
        ModelVariant::RandomForest,
    ] {
        let model = fit(variant, &train, 42).unwrap();
        let path = dir.path().join(format!("{variant}.json"));
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, model);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let probe: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..10.0)).collect();
            let p1 = model.predict_proba_raw(&probe).unwrap();
            let p2 = loaded.predict_proba_raw(&probe).unwrap();
            assert!(
                p1 == p2,
                "{variant}: probe prediction differs after reload"
            );
        }
    }
}

#[test]
fn corrupted_model_file_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, "{\"version\": 1, \"variant\": \"logreg\"").unwrap();
    assert!(matches!(load_model(&path), Err(Error::Format(_))));
    std::fs::write(&path, "{\"variant\": \"logreg\"}").unwrap();
    assert!(matches!(load_model(&path), Err(Error::Format(_))));
}

// ─── LLM aggregator and zero-shot ────────────────────────────────────

fn toy_task() -> TaskSpec {
    TaskSpec::new(
        "rag",
        "evidence support",
        vec!["context".into(), "question".into(), "answer".into()],
        PromptFamily::EvidenceSupport,
    )
    .unwrap()
}

fn toy_ucs(concept_sizes: &[usize]) -> CriteriaSet {
    let task = toy_task();
    let concepts: Vec<Concept> = concept_sizes
        .iter()
        .enumerate()
        .map(|(j, _)| Concept {
            id: format!("c{}", j + 1),
            name: format!("Concept {}", j + 1),
            task_id: "rag".into(),
        })
        .collect();
    let questions: Vec<Vec<Criterion>> = concept_sizes
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            (1..=n)
                .map(|i| Criterion {
                    id: format!("c{}.q{i}", j + 1),
                    question: format!("probe {i} of concept {}?", j + 1),
                    concept_id: format!("c{}", j + 1),
                    index_within_concept: i,
                })
                .collect()
        })
        .collect();
    build_ucs(
        &task,
        concepts,
        questions,
        GenerationMetadata {
            model_id: "m".into(),
            prompt_family: PromptFamily::EvidenceSupport,
            generation_mode: GenerationMode::PerConcept,
            timestamp: None,
            seed_context: "temperature=0.0,top_p=1.0".into(),
        },
    )
    .unwrap()
}

fn toy_sample() -> Sample {
    let mut fields = std::collections::BTreeMap::new();
    fields.insert("context".to_string(), "evidence body".to_string());
    fields.insert("question".to_string(), "why?".to_string());
    fields.insert("answer".to_string(), "because".to_string());
    Sample {
        id: "s1".to_string(),
        language: "de".to_string(),
        label: Some(1),
        fields,
    }
}

fn response_vector(ucs: &CriteriaSet, scores: Vec<f64>) -> CriteriaResponseVector {
    let len = scores.len();
    CriteriaResponseVector {
        sample_id: "s1".into(),
        ucs_checksum: ucs.checksum.clone(),
        scores,
        status: vec![ScoreStatus::Parsed; len],
        raw_texts: vec![],
    }
}

/// Mock plan implementing "faithful iff mean of rendered scores >= 5".
fn mean_threshold_plan(request: &crate::gateway::CompletionRequest) -> Result<String> {
    let score_re = regex::Regex::new(r"Score:\s*(-?\d+(?:\.\d+)?)").unwrap();
    let scores: Vec<f64> = score_re
        .captures_iter(&request.user_prompt)
        .map(|c| c[1].parse().unwrap())
        .collect();
    if scores.is_empty() {
        return Err(Error::BackendConfig("no scores rendered in prompt".into()));
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(if mean >= 5.0 {
        "<judgment>yes</judgment>".to_string()
    } else {
        "<judgment>no</judgment>".to_string()
    })
}

#[test]
fn llm_aggregate_planted_mean_rule() {
    let task = toy_task();
    let ucs = toy_ucs(&[3, 3]);
    let scores = vec![8.0, 7.0, 8.0, 6.0, 7.0, 7.2];
    let direct_mean = scores.iter().sum::<f64>() / scores.len() as f64;
    assert!((direct_mean - 7.2).abs() < 1e-9);
    let vector = response_vector(&ucs, scores);
    let gateway = Gateway::new(Arc::new(MockBackend::new(mean_threshold_plan)), None);
    let verdict =
        llm_aggregate(&toy_sample(), &task, &ucs, &vector, &gateway, "m", true).unwrap();
    assert_eq!(verdict.predicted_label, 1);
    assert_eq!(verdict.source, VerdictSource::LlmAggregated);
    assert_eq!(verdict.probability, None);

    let low = response_vector(&ucs, vec![2.0; 6]);
    let verdict = llm_aggregate(&toy_sample(), &task, &ucs, &low, &gateway, "m", true).unwrap();
    assert_eq!(verdict.predicted_label, 0);
}

#[test]
fn llm_aggregate_renders_criterion_level_scores() {
    // Prompt audit: k entries (criterion level), not m concept means.
    let task = toy_task();
    let ucs = toy_ucs(&[3, 3]);
    let vector = response_vector(&ucs, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let mock = Arc::new(MockBackend::constant("<judgment>yes</judgment>"));
    let gateway = Gateway::new(mock.clone(), None);
    llm_aggregate(&toy_sample(), &task, &ucs, &vector, &gateway, "m", true).unwrap();
    let request = &mock.recorded_requests()[0];
    let rendered_scores = request.user_prompt.matches("Score:").count();
    assert_eq!(rendered_scores, ucs.criterion_count());
    assert!(request.user_prompt.contains("probe 2 of concept 1?"));
    assert!(request.user_prompt.contains("evidence body"));

    // With sample text omitted, criterion entries still render.
    let mock2 = Arc::new(MockBackend::constant("<judgment>yes</judgment>"));
    let gateway2 = Gateway::new(mock2.clone(), None);
    llm_aggregate(&toy_sample(), &task, &ucs, &vector, &gateway2, "m", false).unwrap();
    let request2 = &mock2.recorded_requests()[0];
    assert!(!request2.user_prompt.contains("evidence body"));
    assert_eq!(request2.user_prompt.matches("Score:").count(), 6);
}

#[test]
fn llm_aggregate_errors_without_judgment_token() {
    let task = toy_task();
    let ucs = toy_ucs(&[2]);
    let vector = response_vector(&ucs, vec![5.0, 5.0]);
    let gateway = Gateway::new(Arc::new(MockBackend::constant("hmm, unclear")), None);
    match llm_aggregate(&toy_sample(), &task, &ucs, &vector, &gateway, "m", true) {
        Err(Error::Judgment { .. }) => {}
        other => panic!("expected judgment error, got {other:?}"),
    }
    // One original call plus one repair retry.
    assert_eq!(gateway.stats().backend_calls, 2);
}

#[test]
fn zero_shot_parses_binary_judgments() {
    let task = toy_task();
    let gateway = Gateway::new(Arc::new(MockBackend::constant("yes")), None);
    let verdict = zero_shot_judge(&toy_sample(), &task, &gateway, "m").unwrap();
    assert_eq!(verdict.predicted_label, 1);
    assert_eq!(verdict.source, VerdictSource::ZeroShot);

    let gateway = Gateway::new(Arc::new(MockBackend::constant("no")), None);
    let verdict = zero_shot_judge(&toy_sample(), &task, &gateway, "m").unwrap();
    assert_eq!(verdict.predicted_label, 0);

    let gateway = Gateway::new(Arc::new(MockBackend::constant("yes and no")), None);
    assert!(matches!(
        zero_shot_judge(&toy_sample(), &task, &gateway, "m"),
        Err(Error::Judgment { .. })
    ));
}

#[test]
fn judgment_parser_prefers_tags() {
    assert_eq!(parse_binary_judgment("<judgment>yes</judgment>"), Some(1));
    assert_eq!(parse_binary_judgment("<judgment> NO </judgment>"), Some(0));
    assert_eq!(
        parse_binary_judgment("No doubt: <judgment>yes</judgment>"),
        Some(1)
    );
    assert_eq!(parse_binary_judgment("the answer is yes."), Some(1));
    assert_eq!(parse_binary_judgment("yes... or no?"), None);
    assert_eq!(parse_binary_judgment("inconclusive"), None);
}
