//! Uniform access to a chat-completion LLM with deterministic settings,
//! a content-addressed disk cache, and offline mock/replay backends.
//!
//! Every pipeline stage talks to the model through [`Gateway::complete`],
//! so cached runs are byte-reproducible and tests can swap in a scripted
//! mock without touching the network.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Name of the environment variable holding the API key for the remote
/// backend. Credentials are never read from config files.
pub const API_KEY_ENV: &str = "UCS_JUDGE_API_KEY";

/// Default completion budget; truncated completions are flagged, not
/// silently accepted.
pub const DEFAULT_MAX_TOKENS: u32 = 2048;

/// A single-shot chat completion request with deterministic defaults
/// (temperature 0, top_p 1.0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub model_id: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

impl CompletionRequest {
    pub fn new(
        model_id: impl Into<String>,
        system_prompt: impl Into<String>,
        user_prompt: impl Into<String>,
    ) -> Self {
        Self {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            model_id: model_id.into(),
            temperature: 0.0,
            top_p: 1.0,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.system_prompt.is_empty() || self.user_prompt.is_empty() {
            return Err(Error::BackendConfig("prompts must be non-empty".into()));
        }
        if self.temperature < 0.0 {
            return Err(Error::BackendConfig(format!(
                "temperature {} < 0",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::BackendConfig(format!(
                "top_p {} outside (0,1]",
                self.top_p
            )));
        }
        if self.max_tokens == 0 {
            return Err(Error::BackendConfig("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

/// Where a completion's text came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Remote,
    Mock,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub cache_hit: bool,
    pub backend: BackendKind,
    /// Set when the completion is suspect (truncated, empty).
    pub warning: Option<String>,
}

/// Content digest over every request field; equal requests share a key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub digest: String,
}

/// Deterministic digest of a request, stable across processes and
/// platforms (SHA-256 over the canonical JSON serialization).
pub fn cache_key(request: &CompletionRequest) -> CacheKey {
    let canonical =
        serde_json::to_string(request).expect("completion request serializes infallibly");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    CacheKey {
        digest: hex::encode(hasher.finalize()),
    }
}

/// A completion provider. Implementations must be safe for concurrent
/// use; the gateway's cache sits in front of all of them.
pub trait Backend: Send + Sync {
    fn kind(&self) -> BackendKind;
    fn run(&self, request: &CompletionRequest) -> Result<RawCompletion>;
}

/// Backend output before the gateway attaches cache provenance.
pub struct RawCompletion {
    text: String,
    prompt_tokens: u64,
    completion_tokens: u64,
    warning: Option<String>,
}

impl RawCompletion {
    pub fn new(text: String) -> Self {
        let completion_tokens = approx_tokens(&text);
        Self {
            text,
            prompt_tokens: 0,
            completion_tokens,
            warning: None,
        }
    }

    pub fn with_usage(mut self, prompt_tokens: u64, completion_tokens: u64) -> Self {
        self.prompt_tokens = prompt_tokens;
        self.completion_tokens = completion_tokens;
        self
    }

    pub fn with_warning(mut self, warning: impl Into<String>) -> Self {
        self.warning = Some(warning.into());
        self
    }
}

fn approx_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

// ─── Mock backend ────────────────────────────────────────────────────

type MockPlan = dyn Fn(&CompletionRequest) -> Result<String> + Send + Sync;

/// Scripted backend: a pure function of the request text. Records every
/// request it sees so tests can audit prompt contents.
pub struct MockBackend {
    plan: Box<MockPlan>,
    requests: Mutex<Vec<CompletionRequest>>,
}

impl MockBackend {
    pub fn new(plan: impl Fn(&CompletionRequest) -> Result<String> + Send + Sync + 'static) -> Self {
        Self {
            plan: Box::new(plan),
            requests: Mutex::new(Vec::new()),
        }
    }

    /// Constant-output mock.
    pub fn constant(text: impl Into<String>) -> Self {
        let text = text.into();
        Self::new(move |_| Ok(text.clone()))
    }

    /// All requests seen so far, in call order.
    pub fn recorded_requests(&self) -> Vec<CompletionRequest> {
        self.requests.lock().unwrap().clone()
    }
}

impl Backend for MockBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Mock
    }

    fn run(&self, request: &CompletionRequest) -> Result<RawCompletion> {
        self.requests.lock().unwrap().push(request.clone());
        let text = (self.plan)(request)?;
        let prompt_tokens = approx_tokens(&request.system_prompt) + approx_tokens(&request.user_prompt);
        let completion_tokens = approx_tokens(&text);
        Ok(RawCompletion::new(text).with_usage(prompt_tokens, completion_tokens))
    }
}

// ─── Replay backend ──────────────────────────────────────────────────

/// Replays completions from a recorded cache directory. A miss is a
/// hard error, never a silent fallback to the network.
pub struct ReplayBackend {
    dir: PathBuf,
}

impl ReplayBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl Backend for ReplayBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Replay
    }

    fn run(&self, request: &CompletionRequest) -> Result<RawCompletion> {
        let key = cache_key(request);
        let path = entry_path(&self.dir, &key.digest, "txt");
        if !path.exists() {
            return Err(Error::FixtureMissing { digest: key.digest });
        }
        let text = std::fs::read_to_string(&path)?;
        let meta = read_meta(&self.dir, &key.digest).ok();
        let (pt, ct) = meta
            .map(|m| (m.prompt_tokens, m.completion_tokens))
            .unwrap_or_else(|| (0, approx_tokens(&text)));
        Ok(RawCompletion::new(text).with_usage(pt, ct))
    }
}

// ─── Remote backend ──────────────────────────────────────────────────

/// Retry schedule for the remote backend: transport failures and 5xx
/// responses are retried with exponential backoff; 4xx fails fast.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        // 3 retries after the initial attempt, waiting 1s/2s/4s.
        Self {
            retries: 3,
            base_delay: Duration::from_secs(1),
        }
    }
}

/// HTTP backend speaking the common chat-completions POST shape:
/// a messages array (system + user) plus sampling parameters, with the
/// assistant text read from the first choice.
pub struct RemoteBackend {
    endpoint: String,
    api_key: Option<String>,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl RemoteBackend {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: std::env::var(API_KEY_ENV).ok(),
            retry: RetryPolicy::default(),
            client: reqwest::blocking::Client::new(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn attempt(&self, request: &CompletionRequest) -> std::result::Result<RawCompletion, (bool, String)> {
        let body = serde_json::json!({
            "model": request.model_id,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_tokens,
        });
        let mut req = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let response = req
            .send()
            .map_err(|e| (true, format!("transport: {e}")))?;
        let status = response.status();
        if status.is_server_error() {
            return Err((true, format!("server error {status}")));
        }
        if !status.is_success() {
            return Err((false, format!("client error {status}")));
        }
        let value: serde_json::Value = response
            .json()
            .map_err(|e| (true, format!("malformed response body: {e}")))?;
        let choice = &value["choices"][0];
        let text = choice["message"]["content"]
            .as_str()
            .ok_or_else(|| (false, "response has no message content".to_string()))?
            .to_string();
        let finish_reason = choice["finish_reason"].as_str().unwrap_or("");
        let prompt_tokens = value["usage"]["prompt_tokens"].as_u64().unwrap_or(0);
        let completion_tokens = value["usage"]["completion_tokens"].as_u64().unwrap_or(0);

        let mut raw = RawCompletion::new(text).with_usage(prompt_tokens, completion_tokens);
        if finish_reason == "length" {
            raw = raw.with_warning("completion truncated at max_tokens");
        } else if raw.text.is_empty() {
            raw = raw.with_warning("empty completion text");
        }
        Ok(raw)
    }
}

impl Backend for RemoteBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Remote
    }

    fn run(&self, request: &CompletionRequest) -> Result<RawCompletion> {
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            match self.attempt(request) {
                Ok(raw) => return Ok(raw),
                Err((retryable, message)) => {
                    if !retryable || attempts > self.retry.retries {
                        return Err(Error::Transport { attempts, message });
                    }
                    let delay = self.retry.base_delay * 2u32.pow(attempts - 1);
                    std::thread::sleep(delay);
                }
            }
        }
    }
}

// ─── Disk cache ──────────────────────────────────────────────────────

#[derive(Debug, Serialize, Deserialize)]
struct CacheMeta {
    model_id: String,
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
    system_prompt: String,
    user_prompt: String,
    prompt_tokens: u64,
    completion_tokens: u64,
    backend: BackendKind,
    warning: Option<String>,
}

fn entry_path(dir: &Path, digest: &str, ext: &str) -> PathBuf {
    dir.join(&digest[..2]).join(format!("{digest}.{ext}"))
}

fn read_meta(dir: &Path, digest: &str) -> Result<CacheMeta> {
    let text = std::fs::read_to_string(entry_path(dir, digest, "meta"))?;
    Ok(serde_json::from_str(&text)?)
}

// Writes are atomic (temp file then rename) so concurrent completions
// for one key can race without corrupting entries. Temp names carry a
// process-wide counter: two threads writing one key never collide.
static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!(
        "tmp-{}-{}",
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

// ─── Gateway ─────────────────────────────────────────────────────────

/// Running totals for one gateway instance.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayStats {
    pub backend_calls: u64,
    pub cache_hits: u64,
}

/// The single entry point for model calls: cache lookup, backend
/// dispatch, and cache write-back.
pub struct Gateway {
    backend: Arc<dyn Backend>,
    cache_dir: Option<PathBuf>,
    backend_calls: AtomicU64,
    cache_hits: AtomicU64,
    concurrency: usize,
}

impl Gateway {
    pub fn new(backend: Arc<dyn Backend>, cache_dir: Option<PathBuf>) -> Self {
        Self {
            backend,
            cache_dir,
            backend_calls: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
            concurrency: 8,
        }
    }

    pub fn with_concurrency(mut self, bound: usize) -> Self {
        self.concurrency = bound.max(1);
        self
    }

    /// Upper bound on in-flight completions for batch callers.
    pub fn concurrency(&self) -> usize {
        self.concurrency
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.kind()
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            backend_calls: self.backend_calls.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
        }
    }

    /// Complete a request, serving from the cache when possible. On a
    /// miss the backend result is written back before returning.
    pub fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult> {
        request.validate()?;
        let key = cache_key(request);

        if let Some(dir) = &self.cache_dir {
            let text_path = entry_path(dir, &key.digest, "txt");
            if text_path.exists() {
                let text = std::fs::read_to_string(&text_path)?;
                let meta = read_meta(dir, &key.digest)?;
                self.cache_hits.fetch_add(1, Ordering::Relaxed);
                return Ok(CompletionResult {
                    text,
                    prompt_tokens: meta.prompt_tokens,
                    completion_tokens: meta.completion_tokens,
                    cache_hit: true,
                    backend: meta.backend,
                    warning: meta.warning,
                });
            }
        }

        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        let raw = self.backend.run(request)?;

        if let Some(dir) = &self.cache_dir {
            let meta = CacheMeta {
                model_id: request.model_id.clone(),
                temperature: request.temperature,
                top_p: request.top_p,
                max_tokens: request.max_tokens,
                system_prompt: request.system_prompt.clone(),
                user_prompt: request.user_prompt.clone(),
                prompt_tokens: raw.prompt_tokens,
                completion_tokens: raw.completion_tokens,
                backend: self.backend.kind(),
                warning: raw.warning.clone(),
            };
            // Meta lands first: a reader that sees the text file can
            // rely on the meta file being present.
            write_atomic(
                &entry_path(dir, &key.digest, "meta"),
                &serde_json::to_string_pretty(&meta)?,
            )?;
            write_atomic(&entry_path(dir, &key.digest, "txt"), &raw.text)?;
        }

        Ok(CompletionResult {
            text: raw.text,
            prompt_tokens: raw.prompt_tokens,
            completion_tokens: raw.completion_tokens,
            cache_hit: false,
            backend: self.backend.kind(),
            warning: raw.warning,
        })
    }
}

/// Map `worker` over `items` with at most `bound` worker threads,
/// preserving input order in the output. Failures are returned
/// per-item so callers decide their own failure policy.
pub fn bounded_parallel_map<T, R, F>(items: &[T], bound: usize, worker: F) -> Vec<Result<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    let bound = bound.max(1).min(items.len().max(1));
    if bound <= 1 || items.len() <= 1 {
        return items.iter().map(&worker).collect();
    }
    let next = AtomicU64::new(0);
    let results: Vec<Mutex<Option<Result<R>>>> =
        items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..bound {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed) as usize;
                if i >= items.len() {
                    break;
                }
                let r = worker(&items[i]);
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker completed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical_request() -> CompletionRequest {
        CompletionRequest::new("test-model", "system text", "user text")
    }

    #[test]
    fn identical_requests_share_digests() {
        let a = cache_key(&canonical_request());
        let b = cache_key(&canonical_request());
        assert_eq!(a, b);
    }

    #[test]
    fn top_p_changes_digest() {
        let base = canonical_request();
        let mut other = canonical_request();
        other.top_p = 0.9;
        assert_ne!(cache_key(&base), cache_key(&other));
    }

    #[test]
    fn golden_digest_of_canonical_request() {
        // Frozen once from the chosen hash (SHA-256 over canonical JSON);
        // guards against accidental key-material or serializer changes.
        let key = cache_key(&canonical_request());
        assert_eq!(
            key.digest,
            "93ce017b1c78a65839ce52f4df048f9b131e9a7bb2ff91d9751354cc6a462852"
        );
    }

    #[test]
    fn mock_backend_is_scripted_and_recorded() {
        let mock = MockBackend::constant("<concepts><concept1>A</concept1></concepts>");
        let gateway = Gateway::new(Arc::new(mock), None);
        let result = gateway.complete(&canonical_request()).unwrap();
        assert_eq!(result.text, "<concepts><concept1>A</concept1></concepts>");
        assert_eq!(result.backend, BackendKind::Mock);
        assert!(!result.cache_hit);
    }

    #[test]
    fn cache_round_trip_returns_identical_text() {
        let dir = tempfile::tempdir().unwrap();
        let mock = MockBackend::constant("payload");
        let gateway = Gateway::new(Arc::new(mock), Some(dir.path().to_path_buf()));
        let first = gateway.complete(&canonical_request()).unwrap();
        let second = gateway.complete(&canonical_request()).unwrap();
        assert!(!first.cache_hit);
        assert!(second.cache_hit);
        assert_eq!(first.text, second.text);
        assert_eq!(gateway.stats().backend_calls, 1);
        assert_eq!(gateway.stats().cache_hits, 1);
    }

    #[test]
    fn cache_layout_uses_digest_prefix() {
        let dir = tempfile::tempdir().unwrap();
        let gateway = Gateway::new(
            Arc::new(MockBackend::constant("x")),
            Some(dir.path().to_path_buf()),
        );
        let request = canonical_request();
        gateway.complete(&request).unwrap();
        let digest = cache_key(&request).digest;
        assert!(dir
            .path()
            .join(&digest[..2])
            .join(format!("{digest}.txt"))
            .exists());
        assert!(dir
            .path()
            .join(&digest[..2])
            .join(format!("{digest}.meta"))
            .exists());
    }

    #[test]
    fn replay_miss_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let gateway = Gateway::new(Arc::new(ReplayBackend::new(dir.path())), None);
        match gateway.complete(&canonical_request()) {
            Err(Error::FixtureMissing { .. }) => {}
            other => panic!("expected fixture-missing error, got {other:?}"),
        }
    }

    #[test]
    fn replay_serves_previously_cached_completions() {
        let dir = tempfile::tempdir().unwrap();
        // Record with a mock+cache, then replay from the same directory.
        let recorder = Gateway::new(
            Arc::new(MockBackend::constant("recorded text")),
            Some(dir.path().to_path_buf()),
        );
        recorder.complete(&canonical_request()).unwrap();

        let replayer = Gateway::new(Arc::new(ReplayBackend::new(dir.path())), None);
        let result = replayer.complete(&canonical_request()).unwrap();
        assert_eq!(result.text, "recorded text");
        assert_eq!(result.backend, BackendKind::Replay);
    }

    #[test]
    fn mock_plan_errors_are_configuration_errors() {
        let mock = MockBackend::new(|_| Err(Error::BackendConfig("bad plan".into())));
        let gateway = Gateway::new(Arc::new(mock), None);
        assert!(matches!(
            gateway.complete(&canonical_request()),
            Err(Error::BackendConfig(_))
        ));
    }

    #[test]
    fn request_validation_rejects_bad_parameters() {
        let mut r = canonical_request();
        r.top_p = 0.0;
        assert!(r.validate().is_err());
        let mut r = canonical_request();
        r.temperature = -1.0;
        assert!(r.validate().is_err());
        let mut r = canonical_request();
        r.user_prompt.clear();
        assert!(r.validate().is_err());
    }

    #[test]
    fn default_request_parameters_are_deterministic_setting() {
        let r = canonical_request();
        assert_eq!(r.temperature, 0.0);
        assert_eq!(r.top_p, 1.0);
        assert_eq!(r.max_tokens, DEFAULT_MAX_TOKENS);
    }

    #[test]
    fn bounded_parallel_map_preserves_order() {
        let items: Vec<u64> = (0..100).collect();
        let results = bounded_parallel_map(&items, 8, |&x| Ok(x * 2));
        let values: Vec<u64> = results.into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(values, (0..100).map(|x| x * 2).collect::<Vec<_>>());
    }
}
