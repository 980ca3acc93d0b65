//! Crate-wide error type, grouped into failure families that map onto
//! distinct process exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // ── config family ────────────────────────────────────────────────
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown config keys in {file}: {}", keys.join(", "))]
    UnknownKeys { file: String, keys: Vec<String> },

    // ── data family ──────────────────────────────────────────────────
    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("duplicate sample id '{id}' at line {line}")]
    DuplicateId { line: usize, id: String },
    #[error("unknown language '{language}' at line {line}")]
    UnknownLanguage { line: usize, language: String },
    #[error("stratification error: {0}")]
    Stratification(String),
    #[error("range error: {0}")]
    Range(String),

    // ── gateway family ───────────────────────────────────────────────
    #[error("gateway transport failure after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("replay fixture missing for digest {digest}")]
    FixtureMissing { digest: String },
    #[error("backend configuration error: {0}")]
    BackendConfig(String),

    // ── parse family ─────────────────────────────────────────────────
    #[error("tag parse error: {message}\n--- raw text ---\n{raw}")]
    TagParse { message: String, raw: String },
    #[error("score parse error: {message}\n--- raw text ---\n{raw}")]
    ScoreParse { message: String, raw: String },
    #[error("could not parse a binary judgment\n--- raw text ---\n{raw}")]
    Judgment { raw: String },
    #[error("generation error: expected {expected_min}..={expected_max} items, got {got}")]
    GenerationRange {
        expected_min: usize,
        expected_max: usize,
        got: usize,
    },
    #[error("generation error: {message}\n--- raw text ---\n{raw}")]
    Generation { message: String, raw: String },

    // ── training family ──────────────────────────────────────────────
    #[error("training error: {0}")]
    Training(String),
    #[error("divergence: {0}")]
    Divergence(String),

    // ── metric family ────────────────────────────────────────────────
    #[error("metric error: {0}")]
    Metric(String),

    // ── format family (artifact files, checksums) ────────────────────
    #[error("format error: {0}")]
    Format(String),
    #[error("version error: {0}")]
    Version(String),
    #[error("alignment error: {0}")]
    Alignment(String),

    // ── io family ────────────────────────────────────────────────────
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this failure family.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Config(_) | UnknownKeys { .. } => 2,
            Schema { .. } | DuplicateId { .. } | UnknownLanguage { .. } | Stratification(_)
            | Range(_) => 3,
            Transport { .. } | FixtureMissing { .. } | BackendConfig(_) => 4,
            TagParse { .. } | ScoreParse { .. } | Judgment { .. } | GenerationRange { .. }
            | Generation { .. } => 5,
            Training(_) | Divergence(_) => 6,
            Metric(_) => 7,
            Format(_) | Version(_) | Alignment(_) => 8,
            Io(_) | Json(_) => 9,
        }
    }
}
