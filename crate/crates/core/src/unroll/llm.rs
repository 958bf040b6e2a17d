use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde_json::json;
use thiserror::Error;

use super::cache::{CacheEntry, UnrollCache, UnrollCacheKey};
use super::prompt::{build_unroll_prompt, prompt_version, RETRY_NUDGE};
use super::response::{parse_unroll_response, ParsedResponse};
use super::{StatementSet, UnrollError, Unroller};
use crate::table::Table;

/// Environment variable holding the completion API credential.
pub const API_KEY_ENV: &str = "TABEVAL_LLM_API_KEY";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("transport error: {0}")]
pub struct TransportError(pub String);

/// A text-completion backend. Implementations decode deterministically
/// (temperature 0 or the provider's minimum).
pub trait CompletionClient: Send + Sync {
    fn model_id(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<String, TransportError>;
}

/// OpenAI-style `chat/completions` client.
pub struct HttpCompletionClient {
    agent: ureq::Agent,
    endpoint: String,
    model_id: String,
    api_key: String,
}

impl HttpCompletionClient {
    pub fn new(endpoint: &str, model_id: &str, api_key: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            agent,
            endpoint: endpoint.to_string(),
            model_id: model_id.to_string(),
            api_key: api_key.to_string(),
        }
    }

    /// Reads the credential from [`API_KEY_ENV`].
    pub fn from_env(endpoint: &str, model_id: &str, timeout: Duration) -> Result<Self, String> {
        let key = std::env::var(API_KEY_ENV).map_err(|_| format!("{API_KEY_ENV} is not set"))?;
        Ok(Self::new(endpoint, model_id, &key, timeout))
    }
}

impl CompletionClient for HttpCompletionClient {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let body = json!({
            "model": self.model_id,
            "temperature": 0,
            "n": 1,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(&body)
            .map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(TransportError(format!("HTTP {status}: {text}")));
        }
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| TransportError(format!("bad JSON: {e}")))?;
        let choice = &value["choices"][0];
        choice["message"]["content"]
            .as_str()
            .or_else(|| choice["text"].as_str())
            .map(str::to_string)
            .ok_or_else(|| TransportError("response has no completion text".into()))
    }
}

#[derive(Debug, Clone)]
pub struct LlmSettings {
    /// Extra attempts after the first one.
    pub max_retries: usize,
    /// Sleep before retry `n` is `retry_backoff * n` (transport errors only).
    pub retry_backoff: Duration,
}

impl Default for LlmSettings {
    fn default() -> Self {
        Self {
            max_retries: 2,
            retry_backoff: Duration::from_millis(250),
        }
    }
}

/// Unrolls through a completion backend, consulting `cache` first.
///
/// Transport failures and unparseable replies are retried; after an
/// unparseable reply the prompt gets [`RETRY_NUDGE`] appended. Only a reply
/// that parses is stored.
pub fn unroll_llm(
    table: &Table,
    client: &dyn CompletionClient,
    cache: Option<&UnrollCache>,
    settings: &LlmSettings,
) -> Result<StatementSet, UnrollError> {
    run_llm(table, client, cache, settings, &AtomicUsize::new(0))
}

fn run_llm(
    table: &Table,
    client: &dyn CompletionClient,
    cache: Option<&UnrollCache>,
    settings: &LlmSettings,
    attempts: &AtomicUsize,
) -> Result<StatementSet, UnrollError> {
    if table.n_rows() == 0 {
        return Err(UnrollError::EmptyTable);
    }
    let Some(cache) = cache else {
        return fetch(table, client, settings, attempts).map(|(_, _, p)| p.statements);
    };
    let key = UnrollCacheKey::new(table, prompt_version(), client.model_id());
    if let Some(hit) = cached_parse(cache, &key, table) {
        return Ok(hit);
    }
    cache.with_key_lock(&key, || {
        if let Some(hit) = cached_parse(cache, &key, table) {
            return Ok(hit);
        }
        let (prompt, raw, parsed) = fetch(table, client, settings, attempts)?;
        cache.put(&key, &CacheEntry::new(prompt, raw, &key))?;
        Ok(parsed.statements)
    })
}

fn cached_parse(cache: &UnrollCache, key: &UnrollCacheKey, table: &Table) -> Option<StatementSet> {
    let entry = cache.get(key)?;
    match parse_unroll_response(&entry.raw_response, Some(table)) {
        Ok(parsed) => Some(parsed.statements),
        Err(e) => {
            log::warn!(
                "cached response for {} no longer parses ({e}); refetching",
                key.digest()
            );
            None
        }
    }
}

fn fetch(
    table: &Table,
    client: &dyn CompletionClient,
    settings: &LlmSettings,
    attempts: &AtomicUsize,
) -> Result<(String, String, ParsedResponse), UnrollError> {
    let base = build_unroll_prompt(table);
    let mut prompt = base.clone();
    let mut last = UnrollError::BackendUnavailable("no attempt made".into());
    for attempt in 1..=settings.max_retries + 1 {
        attempts.fetch_add(1, Ordering::SeqCst);
        log::info!(
            "unroll request to {} (attempt {attempt})",
            client.model_id()
        );
        match client.complete(&prompt) {
            Ok(raw) => match parse_unroll_response(&raw, Some(table)) {
                Ok(parsed) => return Ok((prompt, raw, parsed)),
                Err(e) => {
                    log::warn!("attempt {attempt}: {e}");
                    prompt = format!("{base}\n{RETRY_NUDGE}\n");
                    last = e;
                }
            },
            Err(e) => {
                log::warn!("attempt {attempt}: {e}");
                last = UnrollError::BackendUnavailable(e.0);
                if attempt <= settings.max_retries && !settings.retry_backoff.is_zero() {
                    std::thread::sleep(settings.retry_backoff * attempt as u32);
                }
            }
        }
    }
    Err(last)
}

/// [`Unroller`] backed by a completion client and an optional cache.
pub struct LlmUnroller {
    client: Arc<dyn CompletionClient>,
    cache: Option<Arc<UnrollCache>>,
    settings: LlmSettings,
    attempts: AtomicUsize,
}

impl LlmUnroller {
    pub fn new(
        client: Arc<dyn CompletionClient>,
        cache: Option<Arc<UnrollCache>>,
        settings: LlmSettings,
    ) -> Self {
        Self {
            client,
            cache,
            settings,
            attempts: AtomicUsize::new(0),
        }
    }

    /// Completion requests issued so far, retries included.
    pub fn attempts(&self) -> usize {
        self.attempts.load(Ordering::SeqCst)
    }
}

impl Unroller for LlmUnroller {
    fn unroll(&self, table: &Table) -> Result<StatementSet, UnrollError> {
        run_llm(
            table,
            self.client.as_ref(),
            self.cache.as_deref(),
            &self.settings,
            &self.attempts,
        )
    }

    fn name(&self) -> String {
        format!("llm:{}", self.client.model_id())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;

    /// Replays canned replies in order and counts calls.
    struct Scripted {
        replies: Mutex<Vec<Result<String, TransportError>>>,
        calls: AtomicUsize,
        prompts: Mutex<Vec<String>>,
    }

    impl Scripted {
        fn new(mut replies: Vec<Result<String, TransportError>>) -> Self {
            replies.reverse();
            Self {
                replies: Mutex::new(replies),
                calls: AtomicUsize::new(0),
                prompts: Mutex::new(Vec::new()),
            }
        }
    }

    impl CompletionClient for Scripted {
        fn model_id(&self) -> &str {
            "scripted"
        }
        fn complete(&self, prompt: &str) -> Result<String, TransportError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.prompts.lock().unwrap().push(prompt.to_string());
            self.replies
                .lock()
                .unwrap()
                .pop()
                .unwrap_or_else(|| Err(TransportError("script exhausted".into())))
        }
    }

    fn quick() -> LlmSettings {
        LlmSettings {
            max_retries: 2,
            retry_backoff: Duration::ZERO,
        }
    }

    fn table() -> Table {
        Table::from_strings("t", ["k", "v"], [["a", "1"]]).unwrap()
    }

    #[test]
    fn retries_garbage_with_nudge() {
        let client = Scripted::new(vec![
            Ok("garbage".into()),
            Ok("more garbage".into()),
            Ok("Statements:\n1. a has 1.".into()),
        ]);
        let set = unroll_llm(&table(), &client, None, &quick()).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(client.calls.load(Ordering::SeqCst), 3);
        let prompts = client.prompts.lock().unwrap();
        assert!(!prompts[0].contains(RETRY_NUDGE));
        assert!(prompts[1].ends_with(&format!("{RETRY_NUDGE}\n")));
    }

    #[test]
    fn exhausted_transport_is_backend_unavailable() {
        let client = Scripted::new(vec![]);
        let err = unroll_llm(&table(), &client, None, &quick()).unwrap_err();
        assert!(matches!(err, UnrollError::BackendUnavailable(_)));
        assert_eq!(client.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn final_unparseable_is_reported() {
        let client = Scripted::new(vec![Ok("x".into()), Ok("y".into()), Ok("z".into())]);
        let err = unroll_llm(&table(), &client, None, &quick()).unwrap_err();
        assert!(matches!(err, UnrollError::UnparseableResponse(_)));
    }

    #[test]
    fn cache_hit_skips_client() {
        let dir = tempfile::tempdir().unwrap();
        let cache = UnrollCache::open(dir.path()).unwrap();
        let client = Scripted::new(vec![Ok("Statements:\n1. a has 1.".into())]);
        let first = unroll_llm(&table(), &client, Some(&cache), &quick()).unwrap();
        let second = unroll_llm(&table(), &client, Some(&cache), &quick()).unwrap();
        assert_eq!(first, second);
        assert_eq!(client.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn unroller_counts_attempts() {
        let client = Arc::new(Scripted::new(vec![
            Err(TransportError("reset".into())),
            Ok("Statements:\n1. a has 1.".into()),
        ]));
        let unroller = LlmUnroller::new(client, None, quick());
        unroller.unroll(&table()).unwrap();
        assert_eq!(unroller.attempts(), 2);
        assert_eq!(unroller.name(), "llm:scripted");
    }
}
