//! Criteria-based LLM judging with cross-lingual transfer.
//!
//! The pipeline factors an LLM judge's decision through a universal
//! criteria set (UCS): a task-specific, language-universal set of
//! evaluation questions grouped under concepts. Samples are scored per
//! criterion by the LLM, criterion scores are averaged into
//! concept-level vectors, and a lightweight classifier trained on
//! English labels is applied unchanged to every other language.
//!
//! Modules follow the pipeline stages:
//!
//! - [`dataset`] — sample/dataset schemas, JSONL ingestion, seeded
//!   splits and subsampling
//! - [`gateway`] — chat-completion access with deterministic settings,
//!   disk cache, and mock/replay backends
//! - [`criteria`] — Stage 1: concept and question generation, tagged
//!   output parsing, UCS persistence
//! - [`scoring`] — Stage 2: criterion scoring under the decomposition
//!   variants, clamping/imputation, concept aggregation
//! - [`transfer`] — Stage 3: lightweight classifiers, the LLM
//!   aggregator, and the zero-shot baseline
//! - [`analysis`] — metrics and experiment harnesses (sample
//!   efficiency, criterion importance, variant comparison)
//! - [`config`] / [`pipeline`] / [`cli`] — orchestration

pub mod analysis;
pub mod cli;
pub mod config;
pub mod criteria;
pub mod dataset;
pub mod error;
pub mod gateway;
pub mod pipeline;
pub mod prompts;
pub mod scoring;
pub mod transfer;

pub use error::{Error, Result};
