//! Chat-completion client with a global in-flight cap, retry/backoff and a
//! deterministic offline mock.
//!
//! All generation and correction traffic goes through [`Gateway::complete`].
//! The live backend speaks the usual `POST <base_url>/chat/completions` JSON
//! protocol; the mock backend is a pure function of the request.

use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;
use tokio::sync::Semaphore;
use tracing::{debug, warn};

pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
const MAX_BACKOFF: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_name: String,
    pub system_text: Option<String>,
    pub user_text: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl ChatRequest {
    /// Stable hex digest over every field of the request.
    pub fn fingerprint(&self) -> String {
        let canonical = json!({
            "model": self.model_name,
            "system": self.system_text,
            "user": self.user_text,
            "temperature": self.temperature,
            "max_tokens": self.max_output_tokens,
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        hex::encode(&digest[..8])
    }

    fn validate(&self) -> Result<(), GatewayError> {
        if self.user_text.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("user_text is empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_output_tokens == 0 {
            return Err(GatewayError::InvalidRequest("max_output_tokens must be positive".into()));
        }
        Ok(())
    }

    fn wire_body(&self) -> serde_json::Value {
        let mut messages = Vec::with_capacity(2);
        if let Some(system) = &self.system_text {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": self.user_text}));
        json!({
            "model": self.model_name,
            "messages": messages,
            "temperature": self.temperature,
            "max_tokens": self.max_output_tokens,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub request_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayConfig {
    pub base_url: String,
    pub api_key_env_name: String,
    pub max_in_flight: usize,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub request_timeout_secs: u64,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            base_url: DEFAULT_BASE_URL.to_string(),
            api_key_env_name: DEFAULT_API_KEY_ENV.to_string(),
            max_in_flight: 8,
            max_retries: 3,
            initial_backoff_ms: 500,
            request_timeout_secs: 60,
        }
    }
}

impl GatewayConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_in_flight == 0 {
            return Err(GatewayError::Config("max_in_flight must be at least 1".into()));
        }
        if self.initial_backoff_ms == 0 {
            return Err(GatewayError::Config("initial_backoff_ms must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid gateway configuration: {0}")]
    Config(String),
    #[error("API key environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("giving up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("malformed completion response: {0}")]
    Protocol(String),
    #[error("completion was empty after normalization")]
    EmptyCompletion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, Error)]
#[error("transport error: {0}")]
pub struct TransportError(pub String);

/// One HTTP exchange. Implementations do not retry.
#[async_trait]
pub trait Transport: Send + Sync {
    async fn post_json(
        &self,
        url: &str,
        api_key: &str,
        body: &serde_json::Value,
    ) -> Result<HttpReply, TransportError>;
}

pub struct ReqwestTransport {
    client: reqwest::Client,
}

impl ReqwestTransport {
    pub fn new(timeout: Duration) -> Result<Self, GatewayError> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self { client })
    }
}

#[async_trait]
impl Transport for ReqwestTransport {
    async fn post_json(
        &self,
        url: &str,
        api_key: &str,
        body: &serde_json::Value,
    ) -> Result<HttpReply, TransportError> {
        let resp = self
            .client
            .post(url)
            .bearer_auth(api_key)
            .json(body)
            .send()
            .await
            .map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.text().await.map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpReply { status, body })
    }
}

/// What the mock answers when no rule matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockFallback {
    /// `ECHO[<request fingerprint>]`.
    Fingerprint,
    /// The text after the last `Sentence: "` up to the final `"` of the
    /// prompt, i.e. the sentence under rewrite returned verbatim. Falls back
    /// to the fingerprint form when the prompt has no such slot.
    EchoSentence,
}

/// Deterministic responder: the first rule whose key occurs in the user
/// text wins, otherwise the fallback applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockResponder {
    rules: Vec<(String, String)>,
    fallback: MockFallback,
}

impl Default for MockResponder {
    fn default() -> Self {
        Self::new(MockFallback::Fingerprint)
    }
}

impl MockResponder {
    pub fn new(fallback: MockFallback) -> Self {
        Self {
            rules: Vec::new(),
            fallback,
        }
    }

    pub fn rule(mut self, key: impl Into<String>, response: impl Into<String>) -> Self {
        self.rules.push((key.into(), response.into()));
        self
    }

    pub fn respond(&self, request: &ChatRequest) -> String {
        if let Some((_, response)) = self
            .rules
            .iter()
            .find(|(key, _)| request.user_text.contains(key.as_str()))
        {
            return response.clone();
        }
        match self.fallback {
            MockFallback::EchoSentence => extract_sentence_slot(&request.user_text)
                .map(str::to_string)
                .unwrap_or_else(|| echo_fingerprint(request)),
            MockFallback::Fingerprint => echo_fingerprint(request),
        }
    }
}

fn echo_fingerprint(request: &ChatRequest) -> String {
    format!("ECHO[{}]", request.fingerprint())
}

fn extract_sentence_slot(prompt: &str) -> Option<&str> {
    const SLOT: &str = "Sentence: \"";
    let start = prompt.rfind(SLOT)? + SLOT.len();
    let end = prompt.rfind('"')?;
    (end > start).then(|| &prompt[start..end])
}

enum Backend {
    Live {
        transport: Arc<dyn Transport>,
        api_key: String,
    },
    Mock(MockResponder),
}

struct GatewayInner {
    backend: Backend,
    limiter: Semaphore,
    config: GatewayConfig,
}

/// Shareable handle; clones use the same in-flight limiter.
#[derive(Clone)]
pub struct Gateway {
    inner: Arc<GatewayInner>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("mock", &self.is_mock())
            .field("config", &self.inner.config)
            .finish()
    }
}

impl Gateway {
    /// Live gateway over reqwest. The API key is read from the environment
    /// variable named in the config.
    pub fn live(config: GatewayConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let api_key = std::env::var(&config.api_key_env_name)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| GatewayError::MissingApiKey(config.api_key_env_name.clone()))?;
        let transport = ReqwestTransport::new(Duration::from_secs(config.request_timeout_secs))?;
        Self::with_transport(config, Arc::new(transport), api_key)
    }

    pub fn with_transport(
        config: GatewayConfig,
        transport: Arc<dyn Transport>,
        api_key: impl Into<String>,
    ) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(Self::from_parts(
            Backend::Live {
                transport,
                api_key: api_key.into(),
            },
            config,
        ))
    }

    pub fn mock(config: GatewayConfig, responder: MockResponder) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(Self::from_parts(Backend::Mock(responder), config))
    }

    fn from_parts(backend: Backend, config: GatewayConfig) -> Self {
        Self {
            inner: Arc::new(GatewayInner {
                backend,
                limiter: Semaphore::new(config.max_in_flight),
                config,
            }),
        }
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.inner.config
    }

    pub fn max_in_flight(&self) -> usize {
        self.inner.config.max_in_flight
    }

    pub fn is_mock(&self) -> bool {
        matches!(self.inner.backend, Backend::Mock(_))
    }

    /// Identifies the backend that produced a dataset. Independent of the
    /// concurrency cap so that runs at different caps compare equal.
    pub fn fingerprint(&self) -> String {
        match &self.inner.backend {
            Backend::Mock(responder) => {
                let encoded = serde_json::to_string(responder).expect("mock responder serializes");
                let digest = Sha256::digest(encoded.as_bytes());
                format!("mock:{}", hex::encode(&digest[..8]))
            }
            Backend::Live { .. } => format!("live:{}", self.inner.config.base_url),
        }
    }

    pub async fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        request.validate()?;
        let _permit = self
            .inner
            .limiter
            .acquire()
            .await
            .expect("gateway limiter is never closed");
        let raw = match &self.inner.backend {
            Backend::Mock(responder) => {
                tokio::task::yield_now().await;
                responder.respond(request)
            }
            Backend::Live { transport, api_key } => {
                self.complete_live(transport.as_ref(), api_key, request).await?
            }
        };
        let text = normalize_text(&raw);
        if text.is_empty() {
            return Err(GatewayError::EmptyCompletion);
        }
        Ok(ChatResponse {
            text,
            request_fingerprint: request.fingerprint(),
        })
    }

    async fn complete_live(
        &self,
        transport: &dyn Transport,
        api_key: &str,
        request: &ChatRequest,
    ) -> Result<String, GatewayError> {
        let config = &self.inner.config;
        let url = format!("{}/chat/completions", config.base_url.trim_end_matches('/'));
        let body = request.wire_body();
        let mut attempt = 0u32;
        loop {
            let last = match transport.post_json(&url, api_key, &body).await {
                Ok(reply) if (200..300).contains(&reply.status) => {
                    return parse_completion(&reply.body);
                }
                Ok(reply) if is_retryable(reply.status) => format!("HTTP {}: {}", reply.status, reply.body),
                Ok(reply) => {
                    return Err(GatewayError::Http {
                        status: reply.status,
                        body: reply.body,
                    })
                }
                Err(err) => err.to_string(),
            };
            attempt += 1;
            if attempt > config.max_retries {
                warn!(attempts = attempt, error = %last, "chat completion failed");
                return Err(GatewayError::Exhausted {
                    attempts: attempt,
                    last,
                });
            }
            let delay = backoff_delay(attempt, config.initial_backoff_ms);
            debug!(attempt, delay_ms = delay.as_millis() as u64, error = %last, "retrying chat completion");
            tokio::time::sleep(delay).await;
        }
    }
}

fn is_retryable(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

/// `initial * 2^(attempt-1)` scaled by a jitter factor in [0.5, 1.0], capped at 30 s.
pub fn backoff_delay(attempt: u32, initial_backoff_ms: u64) -> Duration {
    let exp = attempt.saturating_sub(1).min(16);
    let base = initial_backoff_ms.saturating_mul(1u64 << exp);
    let jitter: f64 = rand::rng().random_range(0.5..=1.0);
    Duration::from_millis((base as f64 * jitter) as u64).min(MAX_BACKOFF)
}

#[derive(Deserialize)]
struct CompletionBody {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

fn parse_completion(body: &str) -> Result<String, GatewayError> {
    let parsed: CompletionBody =
        serde_json::from_str(body).map_err(|e| GatewayError::Protocol(e.to_string()))?;
    let first = parsed
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| GatewayError::Protocol("no choices in response".into()))?;
    Ok(first.message.content.unwrap_or_default())
}

/// Trims, collapses internal whitespace runs to one space, and strips one
/// pair of surrounding double quotes when they enclose the whole payload
/// (and no other double quote occurs inside). Idempotent.
pub fn normalize_text(raw: &str) -> String {
    let collapsed = collapse_whitespace(raw);
    let inner = collapsed
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .filter(|s| !s.contains('"'));
    match inner {
        Some(inner) => collapse_whitespace(inner),
        None => collapsed,
    }
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
