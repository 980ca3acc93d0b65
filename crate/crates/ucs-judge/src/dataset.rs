//! Dataset schemas, JSONL ingestion, and deterministic splitting /
//! subsampling for the transfer experiments.
//!
//! A dataset is a flat list of samples. Each sample carries an id, a
//! language code, an optional binary label, and a set of task-defined
//! text roles (e.g. `context` / `question` / `answer` for RAG
//! faithfulness, `article` / `summary` for summarization faithfulness).
//! Splits and subsamples are pure functions of `(dataset, spec)`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One evaluation sample: a text bundle under judgment plus an optional
/// binary ground-truth label (1 = faithful/correct).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub language: String,
    pub label: Option<u8>,
    /// Role name → text, role names defined by the owning [`TaskSpec`].
    pub fields: BTreeMap<String, String>,
}

impl Sample {
    /// Label as 0/1, or a training error for unlabeled samples.
    pub fn require_label(&self) -> Result<u8> {
        self.label
            .ok_or_else(|| Error::Training(format!("sample '{}' has no label", self.id)))
    }
}

/// A labeled (or partially labeled) collection of samples for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub task_id: String,
    pub samples: Vec<Sample>,
    pub languages: BTreeSet<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Count of samples per label class. Unlabeled samples are skipped.
    pub fn class_counts(&self) -> BTreeMap<u8, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.samples {
            if let Some(y) = s.label {
                *counts.entry(y).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// Which pair of appendix prompt templates the task uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptFamily {
    /// RAG-style: is an answer supported by retrieved evidence passages?
    EvidenceSupport,
    /// Summarization-style: is a summary faithful to its source article?
    SummaryFaithfulness,
}

/// Inclusive integer interval, e.g. allowed concept counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

impl CountRange {
    pub fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn exact(n: usize) -> Self {
        Self { min: n, max: n }
    }

    pub fn contains(&self, n: usize) -> bool {
        self.min <= n && n <= self.max
    }
}

/// Task description and prompt configuration: the input to criteria
/// generation and the schema authority for sample fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    /// Task description handed to concept generation.
    pub description: String,
    /// Ordered role names every sample must populate.
    pub field_roles: Vec<String>,
    pub concept_count_range: CountRange,
    pub questions_per_concept: CountRange,
    pub prompt_family: PromptFamily,
    /// Role rendered into the `{context}` slot of scoring prompts.
    /// Defaults to the first entry of `field_roles`.
    pub context_role: String,
    /// Role rendered into the `{answer_segment}` slot of scoring prompts.
    /// Defaults to the last entry of `field_roles`.
    pub answer_role: String,
}

impl TaskSpec {
    /// Construct with per-family defaults: concept count 3–5 for both
    /// families; 4–6 questions per concept for evidence support,
    /// exactly 6 for summary faithfulness.
    pub fn new(
        task_id: impl Into<String>,
        description: impl Into<String>,
        field_roles: Vec<String>,
        prompt_family: PromptFamily,
    ) -> Result<Self> {
        let field_roles_checked = field_roles;
        if field_roles_checked.is_empty() {
            return Err(Error::Config("task spec needs at least one field role".into()));
        }
        let questions = match prompt_family {
            PromptFamily::EvidenceSupport => CountRange::new(4, 6),
            PromptFamily::SummaryFaithfulness => CountRange::exact(6),
        };
        let spec = Self {
            task_id: task_id.into(),
            description: description.into(),
            context_role: field_roles_checked.first().unwrap().clone(),
            answer_role: field_roles_checked.last().unwrap().clone(),
            field_roles: field_roles_checked,
            concept_count_range: CountRange::new(3, 5),
            questions_per_concept: questions,
            prompt_family,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.task_id.is_empty() {
            return Err(Error::Config("task_id must be non-empty".into()));
        }
        if self.field_roles.is_empty() {
            return Err(Error::Config("field_roles must be non-empty".into()));
        }
        if self.concept_count_range.min < 1 || self.concept_count_range.min > self.concept_count_range.max {
            return Err(Error::Config(format!(
                "invalid concept_count_range [{}, {}]",
                self.concept_count_range.min, self.concept_count_range.max
            )));
        }
        if self.questions_per_concept.min < 1
            || self.questions_per_concept.min > self.questions_per_concept.max
        {
            return Err(Error::Config(format!(
                "invalid questions_per_concept [{}, {}]",
                self.questions_per_concept.min, self.questions_per_concept.max
            )));
        }
        for role in [&self.context_role, &self.answer_role] {
            if !self.field_roles.contains(role) {
                return Err(Error::Config(format!(
                    "role '{role}' is not one of the declared field_roles"
                )));
            }
        }
        Ok(())
    }

    /// Load a task spec from a TOML file. Unknown keys are rejected.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("{origin}: {e}")))?;

        const KNOWN: &[&str] = &[
            "task_id",
            "description",
            "field_roles",
            "prompt_family",
            "concept_count_range",
            "questions_per_concept",
            "context_role",
            "answer_role",
        ];
        let unknown: Vec<String> = table
            .keys()
            .filter(|k| !KNOWN.contains(&k.as_str()))
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownKeys {
                file: origin.to_string(),
                keys: unknown,
            });
        }

        let get_str = |key: &str| -> Result<String> {
            table
                .get(key)
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .ok_or_else(|| Error::Config(format!("{origin}: missing string key '{key}'")))
        };
        let task_id = get_str("task_id")?;
        let description = get_str("description")?;
        let field_roles: Vec<String> = table
            .get("field_roles")
            .and_then(|v| v.as_array())
            .map(|a| {
                a.iter()
                    .filter_map(|v| v.as_str().map(str::to_string))
                    .collect()
            })
            .ok_or_else(|| Error::Config(format!("{origin}: missing array key 'field_roles'")))?;
        let prompt_family = match get_str("prompt_family")?.as_str() {
            "evidence_support" => PromptFamily::EvidenceSupport,
            "summary_faithfulness" => PromptFamily::SummaryFaithfulness,
            other => {
                return Err(Error::Config(format!(
                    "{origin}: unknown prompt_family '{other}'"
                )))
            }
        };

        let mut spec = TaskSpec::new(task_id, description, field_roles, prompt_family)?;

        if let Some(v) = table.get("concept_count_range") {
            spec.concept_count_range = parse_count_range(v, origin, "concept_count_range")?;
        }
        if let Some(v) = table.get("questions_per_concept") {
            spec.questions_per_concept = parse_count_range(v, origin, "questions_per_concept")?;
        }
        if let Some(v) = table.get("context_role").and_then(|v| v.as_str()) {
            spec.context_role = v.to_string();
        }
        if let Some(v) = table.get("answer_role").and_then(|v| v.as_str()) {
            spec.answer_role = v.to_string();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_count_range(value: &toml::Value, origin: &str, key: &str) -> Result<CountRange> {
    match value {
        toml::Value::Integer(n) if *n >= 1 => Ok(CountRange::exact(*n as usize)),
        toml::Value::Array(a) if a.len() == 2 => {
            let min = a[0].as_integer();
            let max = a[1].as_integer();
            match (min, max) {
                (Some(min), Some(max)) if min >= 1 && min <= max => {
                    Ok(CountRange::new(min as usize, max as usize))
                }
                _ => Err(Error::Config(format!(
                    "{origin}: '{key}' must be [min, max] with 1 <= min <= max"
                ))),
            }
        }
        _ => Err(Error::Config(format!(
            "{origin}: '{key}' must be an integer or a [min, max] pair"
        ))),
    }
}

/// Parameters for the fixed train/test split and training subsampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub train_fraction_used: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.30,
            train_fraction_used: 1.0,
            seed: 42,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Range(format!(
                "test_fraction {} outside (0,1)",
                self.test_fraction
            )));
        }
        if !(self.train_fraction_used > 0.0 && self.train_fraction_used <= 1.0) {
            return Err(Error::Range(format!(
                "train_fraction_used {} outside (0,1]",
                self.train_fraction_used
            )));
        }
        Ok(())
    }
}

/// Load a JSONL dataset and validate every record against the task's
/// required roles. `expected_language`, when given, pins the language
/// every record must declare (the pipeline loads one file per language).
///
/// Fails with the offending line number on the first invalid record.
pub fn load_dataset(
    path: impl AsRef<Path>,
    task: &TaskSpec,
    expected_language: Option<&str>,
) -> Result<Dataset> {
    let text = std::fs::read_to_string(path.as_ref())?;
    load_dataset_str(&text, task, expected_language)
}

/// [`load_dataset`] over an in-memory JSONL string.
pub fn load_dataset_str(
    text: &str,
    task: &TaskSpec,
    expected_language: Option<&str>,
) -> Result<Dataset> {
    let mut samples = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut languages = BTreeSet::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Schema {
            line: line_no,
            message: format!("invalid JSON: {e}"),
        })?;
        let obj = value.as_object().ok_or_else(|| Error::Schema {
            line: line_no,
            message: "record is not a JSON object".into(),
        })?;

        let id = obj
            .get("id")
            .and_then(|v| v.as_str())
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Schema {
                line: line_no,
                message: "missing or empty 'id'".into(),
            })?
            .to_string();
        if !seen_ids.insert(id.clone()) {
            return Err(Error::DuplicateId { line: line_no, id });
        }

        let language = obj
            .get("language")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Schema {
                line: line_no,
                message: "missing 'language'".into(),
            })?
            .to_string();
        if !is_plausible_language_code(&language) {
            return Err(Error::UnknownLanguage {
                line: line_no,
                language,
            });
        }
        if let Some(expected) = expected_language {
            if language != expected {
                return Err(Error::UnknownLanguage {
                    line: line_no,
                    language,
                });
            }
        }

        let label = match obj.get("label") {
            None | Some(serde_json::Value::Null) => None,
            Some(v) => match v.as_i64() {
                Some(0) => Some(0),
                Some(1) => Some(1),
                _ => {
                    return Err(Error::Schema {
                        line: line_no,
                        message: format!("label must be 0 or 1, got {v}"),
                    })
                }
            },
        };

        let mut fields = BTreeMap::new();
        for role in &task.field_roles {
            let text = obj
                .get(role)
                .and_then(|v| v.as_str())
                .filter(|s| !s.trim().is_empty())
                .ok_or_else(|| Error::Schema {
                    line: line_no,
                    message: format!("missing or empty required role '{role}'"),
                })?;
            fields.insert(role.clone(), text.to_string());
        }

        languages.insert(language.clone());
        samples.push(Sample {
            id,
            language,
            label,
            fields,
        });
    }

    Ok(Dataset {
        task_id: task.task_id.clone(),
        samples,
        languages,
    })
}

fn is_plausible_language_code(code: &str) -> bool {
    (2..=8).contains(&code.len())
        && code
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

// RNG streams are derived per (seed, purpose, class) so split and
// subsample shuffles are independent of each other.
fn class_rng(seed: u64, purpose: u64, class: u64) -> ChaCha8Rng {
    let mut x = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(purpose.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(class.wrapping_mul(0x94D0_49BB_1331_11EB));
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    ChaCha8Rng::seed_from_u64(x)
}

const PURPOSE_SPLIT: u64 = 1;
const PURPOSE_SUBSAMPLE: u64 = 2;

/// Index-level stratified split over a label sequence. Returns
/// `(train, test)` index lists in ascending order.
///
/// Per class, the test side receives `round(n_class * test_fraction)`
/// entries (clamped so both sides keep at least one of every class).
pub fn stratified_split_indices(
    labels: &[Option<u8>],
    spec: &SplitSpec,
) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if labels.is_empty() {
        return Err(Error::Stratification("cannot split an empty dataset".into()));
    }

    let mut test_members: HashSet<usize> = HashSet::new();
    if spec.stratified {
        let mut by_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
        for (i, label) in labels.iter().enumerate() {
            let label = label.ok_or_else(|| {
                Error::Stratification(format!("entry {i} has no label"))
            })?;
            by_class.entry(label).or_default().push(i);
        }
        if by_class.len() < 2 {
            return Err(Error::Stratification(
                "stratified split needs both classes present".into(),
            ));
        }
        for (&label, indices) in &by_class {
            if indices.len() < 2 {
                return Err(Error::Stratification(format!(
                    "class {label} has fewer than 2 samples"
                )));
            }
            let mut shuffled = indices.clone();
            shuffled.shuffle(&mut class_rng(spec.seed, PURPOSE_SPLIT, label as u64));
            let n = indices.len();
            let want = (n as f64 * spec.test_fraction).round() as usize;
            let take = want.clamp(1, n - 1);
            test_members.extend(shuffled.into_iter().take(take));
        }
    } else {
        let mut shuffled: Vec<usize> = (0..labels.len()).collect();
        shuffled.shuffle(&mut class_rng(spec.seed, PURPOSE_SPLIT, 0));
        let n = shuffled.len();
        let want = (n as f64 * spec.test_fraction).round() as usize;
        let take = want.clamp(1, n.saturating_sub(1).max(1));
        test_members.extend(shuffled.into_iter().take(take));
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for i in 0..labels.len() {
        if test_members.contains(&i) {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    Ok((train, test))
}

/// Deterministic stratified train/test split.
///
/// Output datasets preserve the input sample order; membership is
/// decided by [`stratified_split_indices`].
pub fn stratified_split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let labels: Vec<Option<u8>> = dataset.samples.iter().map(|s| s.label).collect();
    let (train_idx, test_idx) = stratified_split_indices(&labels, spec)?;
    let take = |indices: &[usize]| -> Vec<Sample> {
        indices.iter().map(|&i| dataset.samples[i].clone()).collect()
    };
    Ok((
        subset_dataset(dataset, take(&train_idx)),
        subset_dataset(dataset, take(&test_idx)),
    ))
}

fn subset_dataset(parent: &Dataset, samples: Vec<Sample>) -> Dataset {
    let languages = samples.iter().map(|s| s.language.clone()).collect();
    Dataset {
        task_id: parent.task_id.clone(),
        samples,
        languages,
    }
}

/// Deterministic stratified subsample of `ceil(fraction * n)` training
/// samples.
///
/// Each class is shuffled once per seed and subsets are taken as
/// prefixes of that shuffle, with the per-class allocation computed by
/// a capped Sainte-Laguë apportionment of the total. Allocations are
/// monotone in the total, so subsamples nest: for f1 <= f2 under the
/// same seed, the f1 subsample is a subset of the f2 subsample.
pub fn subsample_train(train: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Range(format!("fraction {fraction} outside (0,1]")));
    }
    if fraction == 1.0 {
        return Ok(train.clone());
    }
    let mut by_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, s) in train.samples.iter().enumerate() {
        let label = s
            .label
            .ok_or_else(|| Error::Training(format!("sample '{}' has no label", s.id)))?;
        by_class.entry(label).or_default().push(i);
    }
    let n = train.samples.len();
    let total = (fraction * n as f64).ceil() as usize;

    let class_sizes: Vec<(u8, usize)> = by_class.iter().map(|(&c, v)| (c, v.len())).collect();
    let allocation = apportion(&class_sizes, total);

    let mut members: HashSet<usize> = HashSet::new();
    for (&label, indices) in &by_class {
        let take = allocation[&label];
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut class_rng(seed, PURPOSE_SUBSAMPLE, label as u64));
        members.extend(shuffled.into_iter().take(take));
    }

    let samples: Vec<Sample> = train
        .samples
        .iter()
        .enumerate()
        .filter(|(i, _)| members.contains(i))
        .map(|(_, s)| s.clone())
        .collect();
    Ok(subset_dataset(train, samples))
}

// Capped Sainte-Laguë: seats are granted in a fixed priority order
// (size / (2k - 1), ties to the larger class then smaller label), so
// the per-class allocation is a prefix function of the total and
// therefore monotone in it.
fn apportion(class_sizes: &[(u8, usize)], total: usize) -> BTreeMap<u8, usize> {
    let mut priorities: Vec<(f64, usize, u8, usize)> = Vec::new();
    for &(label, size) in class_sizes {
        for seat in 1..=size {
            let p = size as f64 / (2 * seat - 1) as f64;
            priorities.push((p, size, label, seat));
        }
    }
    priorities.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(b.1.cmp(&a.1))
            .then(a.2.cmp(&b.2))
    });
    let mut alloc: BTreeMap<u8, usize> = class_sizes.iter().map(|&(l, _)| (l, 0)).collect();
    for (_, _, label, _) in priorities.into_iter().take(total) {
        *alloc.get_mut(&label).unwrap() += 1;
    }
    alloc
}
