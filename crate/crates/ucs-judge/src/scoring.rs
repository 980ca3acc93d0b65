//! Stage 2: score samples against the criteria set, parse the tagged
//! score blocks, clamp/impute, and aggregate criterion scores into
//! concept-level vectors.
//!
//! Scoring runs under one of four decomposition variants: criteria
//! generation and scoring are each either joint (one call) or
//! per-concept (one call per concept). Every criterion always receives
//! a score — by parse, clamp, or imputation — and the status of each
//! entry is recorded.

use std::collections::BTreeMap;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::criteria::{CriteriaSet, GenerationMode};
use crate::dataset::{Dataset, Sample, TaskSpec};
use crate::error::{Error, Result};
use crate::gateway::{bounded_parallel_map, CompletionRequest, Gateway};
use crate::prompts;

pub const SCORE_MIN: f64 = 0.0;
pub const SCORE_MAX: f64 = 10.0;
/// Imputation fallback when a concept has no parsed scores at all.
pub const SCORE_MIDPOINT: f64 = 5.0;

/// How criterion scores are obtained from the LLM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMode {
    /// One call per concept (m calls per sample).
    PerConcept,
    /// One call covering every criterion.
    Joint,
}

impl std::fmt::Display for ScoringMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScoringMode::PerConcept => write!(f, "per_concept"),
            ScoringMode::Joint => write!(f, "joint"),
        }
    }
}

/// One of the four decomposition variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringVariant {
    pub generation: GenerationMode,
    pub scoring: ScoringMode,
}

impl ScoringVariant {
    pub const ALL: [ScoringVariant; 4] = [
        ScoringVariant { generation: GenerationMode::PerConcept, scoring: ScoringMode::PerConcept },
        ScoringVariant { generation: GenerationMode::PerConcept, scoring: ScoringMode::Joint },
        ScoringVariant { generation: GenerationMode::Joint, scoring: ScoringMode::PerConcept },
        ScoringVariant { generation: GenerationMode::Joint, scoring: ScoringMode::Joint },
    ];

    /// Parse a `generation/scoring` label like `per-concept/joint`.
    pub fn parse(label: &str) -> Result<Self> {
        let (g, s) = label.split_once('/').ok_or_else(|| {
            Error::Config(format!(
                "variant '{label}' must look like per-concept/joint"
            ))
        })?;
        let is_joint = |name: &str| -> Result<bool> {
            match name.trim().replace('_', "-").as_str() {
                "per-concept" => Ok(false),
                "joint" => Ok(true),
                other => Err(Error::Config(format!("unknown variant component '{other}'"))),
            }
        };
        Ok(ScoringVariant {
            generation: if is_joint(g)? { GenerationMode::Joint } else { GenerationMode::PerConcept },
            scoring: if is_joint(s)? { ScoringMode::Joint } else { ScoringMode::PerConcept },
        })
    }
}

impl std::fmt::Display for ScoringVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.generation, self.scoring)
    }
}

/// Provenance of one stored criterion score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreStatus {
    Parsed,
    Clamped,
    Imputed,
}

/// Per-criterion scores for one sample, aligned to the canonical
/// criterion order of the criteria set named by `ucs_checksum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaResponseVector {
    pub sample_id: String,
    pub ucs_checksum: String,
    pub scores: Vec<f64>,
    pub status: Vec<ScoreStatus>,
    /// Raw completion text per LLM call, for audit. Not persisted in
    /// score tables (the gateway cache is the durable audit trail).
    pub raw_texts: Vec<String>,
}

/// Concept-level means: the transfer classifier's feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptVector {
    pub sample_id: String,
    pub ucs_checksum: String,
    pub values: Vec<f64>,
}

// ─── Score-block parsing ─────────────────────────────────────────────

/// Outcome of parsing one `<evaluation>` block.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBlockParse {
    /// criterion id → score, for every entry found.
    pub scores: BTreeMap<String, f64>,
    /// Expected criterion ids with no parseable entry; the caller
    /// imputes these.
    pub missing: Vec<String>,
}

/// Extract one numeric score per expected criterion from a tagged
/// `<evaluation>` block. `<questionN>` entries map positionally onto
/// `expected_criterion_ids` (1-based). Integers and decimals are both
/// accepted; justification text is ignored.
pub fn parse_score_block(
    text: &str,
    expected_criterion_ids: &[String],
) -> Result<ScoreBlockParse> {
    let wrapper_re = Regex::new(r"(?s)<evaluation>(.*?)</evaluation>").expect("static regex");
    let inner = match wrapper_re.captures(text) {
        Some(caps) => caps.get(1).unwrap().as_str(),
        None => {
            return Err(Error::ScoreParse {
                message: "no <evaluation> block found".into(),
                raw: text.to_string(),
            })
        }
    };
    let entry_re =
        Regex::new(r"(?s)<question(\d+)>(.*?)</question(\d+)>").expect("static regex");
    let score_re = Regex::new(r"Score:\s*(-?\d+(?:\.\d+)?)").expect("static regex");

    let mut scores = BTreeMap::new();
    for caps in entry_re.captures_iter(inner) {
        let index: usize = match caps[1].parse() {
            Ok(i) => i,
            Err(_) => continue,
        };
        if caps[1] != caps[3] {
            continue;
        }
        if index == 0 || index > expected_criterion_ids.len() {
            continue;
        }
        if let Some(score_caps) = score_re.captures(&caps[2]) {
            let value: f64 = score_caps[1].parse().expect("regex-matched number");
            scores.insert(expected_criterion_ids[index - 1].clone(), value);
        }
    }
    let missing: Vec<String> = expected_criterion_ids
        .iter()
        .filter(|id| !scores.contains_key(*id))
        .cloned()
        .collect();
    Ok(ScoreBlockParse { scores, missing })
}

// ─── Clamp / impute / aggregate ──────────────────────────────────────

/// Build the full k-length score and status vectors from a partial
/// criterion→score mapping. Out-of-range values are clamped into
/// [0, 10]; missing criteria receive the mean of the concept's present
/// scores, falling back to the global midpoint 5.0.
pub fn clamp_and_impute(
    partial: &BTreeMap<String, f64>,
    ucs: &CriteriaSet,
) -> (Vec<f64>, Vec<ScoreStatus>) {
    let k = ucs.criterion_count();
    let mut scores = vec![0.0; k];
    let mut status = vec![ScoreStatus::Imputed; k];

    for (i, criterion) in ucs.criteria.iter().enumerate() {
        if let Some(&value) = partial.get(&criterion.id) {
            if (SCORE_MIN..=SCORE_MAX).contains(&value) {
                scores[i] = value;
                status[i] = ScoreStatus::Parsed;
            } else {
                scores[i] = value.clamp(SCORE_MIN, SCORE_MAX);
                status[i] = ScoreStatus::Clamped;
            }
        }
    }

    for concept in &ucs.concepts {
        let indices = ucs.global_indices_of(&concept.id);
        let present: Vec<f64> = indices
            .iter()
            .filter(|&&i| status[i] != ScoreStatus::Imputed)
            .map(|&i| scores[i])
            .collect();
        let fill = if present.is_empty() {
            SCORE_MIDPOINT
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        };
        for &i in &indices {
            if status[i] == ScoreStatus::Imputed {
                scores[i] = fill;
            }
        }
    }
    (scores, status)
}

/// Concept-level aggregation: each concept's value is the arithmetic
/// mean of its member criterion scores.
pub fn aggregate_concepts(
    vector: &CriteriaResponseVector,
    ucs: &CriteriaSet,
) -> Result<ConceptVector> {
    if vector.ucs_checksum != ucs.checksum {
        return Err(Error::Alignment(format!(
            "criteria-response vector for '{}' carries checksum {} but the criteria set has {}",
            vector.sample_id, vector.ucs_checksum, ucs.checksum
        )));
    }
    if vector.scores.len() != ucs.criterion_count() {
        return Err(Error::Alignment(format!(
            "vector length {} != criterion count {}",
            vector.scores.len(),
            ucs.criterion_count()
        )));
    }
    let values = ucs
        .concepts
        .iter()
        .map(|concept| {
            let indices = ucs.global_indices_of(&concept.id);
            indices.iter().map(|&i| vector.scores[i]).sum::<f64>() / indices.len() as f64
        })
        .collect();
    Ok(ConceptVector {
        sample_id: vector.sample_id.clone(),
        ucs_checksum: vector.ucs_checksum.clone(),
        values,
    })
}

// ─── Sample scoring ──────────────────────────────────────────────────

fn sample_slot_texts<'a>(sample: &'a Sample, task: &TaskSpec) -> Result<(&'a str, &'a str)> {
    let context = sample.fields.get(&task.context_role).ok_or_else(|| {
        Error::Schema {
            line: 0,
            message: format!(
                "sample '{}' is missing role '{}'",
                sample.id, task.context_role
            ),
        }
    })?;
    let answer = sample.fields.get(&task.answer_role).ok_or_else(|| {
        Error::Schema {
            line: 0,
            message: format!(
                "sample '{}' is missing role '{}'",
                sample.id, task.answer_role
            ),
        }
    })?;
    Ok((context, answer))
}

fn call_and_parse(
    gateway: &Gateway,
    model_id: &str,
    system: &str,
    user: &str,
    expected_ids: &[String],
    raw_texts: &mut Vec<String>,
) -> Result<BTreeMap<String, f64>> {
    let request = CompletionRequest::new(model_id, system, user);
    let first = gateway.complete(&request)?;
    raw_texts.push(first.text.clone());
    match parse_score_block(&first.text, expected_ids) {
        Ok(parse) => Ok(parse.scores),
        Err(_) => {
            // One repair retry; a block that still fails leaves every
            // criterion of this call to imputation.
            let repair = CompletionRequest::new(
                model_id,
                system,
                format!("{user}{}", prompts::REPAIR_INSTRUCTION),
            );
            let second = gateway.complete(&repair)?;
            raw_texts.push(second.text.clone());
            match parse_score_block(&second.text, expected_ids) {
                Ok(parse) => Ok(parse.scores),
                Err(_) => Ok(BTreeMap::new()),
            }
        }
    }
}

/// Score one sample against the criteria set. Per-concept scoring
/// issues one gateway call per concept; joint scoring issues a single
/// call covering all criteria.
pub fn score_sample(
    sample: &Sample,
    task: &TaskSpec,
    ucs: &CriteriaSet,
    scoring: ScoringMode,
    gateway: &Gateway,
    model_id: &str,
) -> Result<CriteriaResponseVector> {
    let (context, answer) = sample_slot_texts(sample, task)?;
    let mut raw_texts = Vec::new();
    let mut partial: BTreeMap<String, f64> = BTreeMap::new();

    match scoring {
        ScoringMode::PerConcept => {
            for concept in &ucs.concepts {
                let members = ucs.criteria_of(&concept.id);
                let questions: Vec<String> =
                    members.iter().map(|c| c.question.clone()).collect();
                let ids: Vec<String> = members.iter().map(|c| c.id.clone()).collect();
                let (system, user) = prompts::question_application(
                    task.prompt_family,
                    context,
                    answer,
                    &concept.name,
                    &questions,
                );
                let scores =
                    call_and_parse(gateway, model_id, &system, &user, &ids, &mut raw_texts)?;
                partial.extend(scores);
            }
        }
        ScoringMode::Joint => {
            let sections = ucs.sections();
            let ids: Vec<String> = ucs.criteria.iter().map(|c| c.id.clone()).collect();
            let (system, user) =
                prompts::joint_application(task.prompt_family, context, answer, &sections);
            let scores = call_and_parse(gateway, model_id, &system, &user, &ids, &mut raw_texts)?;
            partial.extend(scores);
        }
    }

    let (scores, status) = clamp_and_impute(&partial, ucs);
    Ok(CriteriaResponseVector {
        sample_id: sample.id.clone(),
        ucs_checksum: ucs.checksum.clone(),
        scores,
        status,
        raw_texts,
    })
}

// ─── Dataset scoring and persistence ─────────────────────────────────

/// One persisted score-table line: the criteria-response vector and its
/// concept-level aggregation for a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub sample_id: String,
    pub language: String,
    pub ucs_checksum: String,
    pub z: Vec<f64>,
    pub status: Vec<ScoreStatus>,
    pub s: Vec<f64>,
}

/// Per-language scoring tallies for a run report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageScoreStats {
    pub samples: usize,
    pub clamped_entries: usize,
    pub imputed_entries: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub per_language: BTreeMap<String, LanguageScoreStats>,
    /// `(sample_id, error)` for samples that failed outright.
    pub failures: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub records: Vec<ScoreRecord>,
    pub summary: ScoreSummary,
}

/// Fraction of samples allowed to fail before the whole run errors.
pub const DEFAULT_FAILURE_THRESHOLD: f64 = 0.05;

/// Score every sample of a dataset. Samples are processed with bounded
/// parallelism and records are ordered by sample id, so the output is
/// byte-stable regardless of completion order. Reruns over a cached
/// gateway issue zero backend calls.
pub fn score_dataset(
    dataset: &Dataset,
    task: &TaskSpec,
    ucs: &CriteriaSet,
    variant: ScoringVariant,
    gateway: &Gateway,
    model_id: &str,
    failure_threshold: f64,
) -> Result<ScoreTable> {
    let mut samples: Vec<&Sample> = dataset.samples.iter().collect();
    samples.sort_by(|a, b| a.id.cmp(&b.id));

    let results = bounded_parallel_map(&samples, gateway.concurrency(), |sample| {
        let vector = score_sample(sample, task, ucs, variant.scoring, gateway, model_id)?;
        let concept = aggregate_concepts(&vector, ucs)?;
        Ok((sample.id.clone(), sample.language.clone(), vector, concept))
    });

    let mut records = Vec::new();
    let mut summary = ScoreSummary::default();
    for (sample, result) in samples.iter().zip(results) {
        match result {
            Ok((sample_id, language, vector, concept)) => {
                let stats = summary.per_language.entry(language.clone()).or_default();
                stats.samples += 1;
                stats.clamped_entries += vector
                    .status
                    .iter()
                    .filter(|s| **s == ScoreStatus::Clamped)
                    .count();
                stats.imputed_entries += vector
                    .status
                    .iter()
                    .filter(|s| **s == ScoreStatus::Imputed)
                    .count();
                records.push(ScoreRecord {
                    sample_id,
                    language,
                    ucs_checksum: vector.ucs_checksum,
                    z: vector.scores,
                    status: vector.status,
                    s: concept.values,
                });
            }
            Err(e) => summary.failures.push((sample.id.clone(), e.to_string())),
        }
    }

    let failure_fraction = summary.failures.len() as f64 / samples.len().max(1) as f64;
    if failure_fraction > failure_threshold {
        return Err(Error::Training(format!(
            "scoring failed for {:.1}% of samples (threshold {:.1}%): first failure: {}",
            failure_fraction * 100.0,
            failure_threshold * 100.0,
            summary
                .failures
                .first()
                .map(|(id, e)| format!("{id}: {e}"))
                .unwrap_or_default()
        )));
    }
    Ok(ScoreTable { records, summary })
}

/// Write a score table as JSONL, one record per line, ordered by
/// sample id.
pub fn save_score_table(table: &ScoreTable, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for record in &table.records {
        out.push_str(&serde_json::to_string(record)?);
        out.push('\n');
    }
    if let Some(parent) = path.as_ref().parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Load a score table, checking that every record shares one criteria
/// set checksum.
pub fn load_score_records(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ScoreRecord = serde_json::from_str(line).map_err(|e| Error::Format(
            format!("score record at line {}: {e}", idx + 1),
        ))?;
        records.push(record);
    }
    if let Some(first) = records.first() {
        let checksum = first.ucs_checksum.clone();
        if let Some(odd) = records.iter().find(|r| r.ucs_checksum != checksum) {
            return Err(Error::Alignment(format!(
                "score table mixes checksums: '{}' vs '{}'",
                checksum, odd.ucs_checksum
            )));
        }
    }
    Ok(records)
}
