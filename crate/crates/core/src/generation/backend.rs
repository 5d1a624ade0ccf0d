use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompt::{diff_of, PromptBundle};

/// Environment variable holding the bearer token for HTTP backends.
pub const API_KEY_ENV: &str = "C3GEN_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub max_retries: u32,
    /// Delay before the first retry; doubles on each further attempt.
    #[serde(with = "secs")]
    pub backoff: Duration,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://localhost:8000/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            temperature: 0.0,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(format!("temperature must be a non-negative number, got {}", self.temperature));
        }
        if self.endpoint.trim().is_empty() {
            return Err("endpoint must not be empty".into());
        }
        Ok(())
    }

    /// Delay before retry number `retry` (1-based).
    pub fn backoff_for(&self, retry: u32) -> Duration {
        self.backoff.saturating_mul(1u32 << (retry - 1).min(16))
    }

    pub fn request_body(&self, bundle: &PromptBundle) -> Value {
        json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": bundle.system_text},
                {"role": "user", "content": bundle.user_text},
            ],
            "temperature": self.temperature,
        })
    }
}

/// Failure of a single request.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttemptError {
    #[error("authentication failed (HTTP {0})")]
    Auth(u16),
    #[error("request timed out")]
    Timeout,
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("request rejected (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl AttemptError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, AttemptError::Timeout | AttemptError::Transient(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub text: String,
    pub request_id: Option<String>,
    /// Reported by backends that do not want wall-clock time recorded.
    pub latency: Option<Duration>,
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, bundle: &PromptBundle, config: &BackendConfig) -> Result<Reply, AttemptError>;
}

/// Extracts the first choice's message content from a chat-completion reply.
pub fn parse_reply(body: &str) -> Result<Reply, AttemptError> {
    let value: Value = serde_json::from_str(body).map_err(|e| AttemptError::Malformed(e.to_string()))?;
    let text = value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| AttemptError::Malformed("no choices[0].message.content".into()))?;
    Ok(Reply {
        text: text.to_string(),
        request_id: value.get("id").and_then(Value::as_str).map(str::to_string),
        latency: None,
    })
}

/// JSON-over-HTTP chat-completion client.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    api_key: Option<String>,
}

impl HttpBackend {
    /// The key is read from [`API_KEY_ENV`] only.
    pub fn from_env(config: &BackendConfig) -> Result<Self, reqwest::Error> {
        let client = reqwest::blocking::Client::builder().timeout(config.timeout).build()?;
        let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Ok(Self { client, api_key })
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&self, bundle: &PromptBundle, config: &BackendConfig) -> Result<Reply, AttemptError> {
        let mut request = self.client.post(&config.endpoint).json(&config.request_body(bundle));
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| {
            if e.is_timeout() {
                AttemptError::Timeout
            } else {
                AttemptError::Transient(e.to_string())
            }
        })?;
        let status = response.status().as_u16();
        let body = response.text().map_err(|e| {
            if e.is_timeout() {
                AttemptError::Timeout
            } else {
                AttemptError::Transient(e.to_string())
            }
        })?;
        match status {
            200..=299 => parse_reply(&body),
            401 | 403 => Err(AttemptError::Auth(status)),
            408 | 409 | 425 | 429 | 500..=599 => Err(AttemptError::Transient(format!("HTTP {status}"))),
            _ => Err(AttemptError::Rejected { status, body: body.chars().take(500).collect() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockBehavior {
    /// The first eight words of the diff's first added line.
    EchoFirstAddedLine,
    Fixed(String),
}

/// Deterministic in-process backend.
pub struct MockBackend {
    behavior: MockBehavior,
    /// Outcomes consumed one per request before `behavior` applies.
    script: Mutex<VecDeque<Result<String, AttemptError>>>,
}

impl MockBackend {
    pub fn new(behavior: MockBehavior) -> Self {
        Self { behavior, script: Mutex::new(VecDeque::new()) }
    }

    pub fn scripted(behavior: MockBehavior, script: impl IntoIterator<Item = Result<String, AttemptError>>) -> Self {
        Self { behavior, script: Mutex::new(script.into_iter().collect()) }
    }
}

/// The first eight whitespace-separated words of the first added line.
pub fn echo_text(diff: &str) -> String {
    diff.lines()
        .find(|l| l.starts_with('+') && !l.starts_with("+++"))
        .map(|l| l[1..].split_whitespace().take(8).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

/// Stable id derived from the request content.
pub fn synthetic_request_id(config: &BackendConfig, bundle: &PromptBundle) -> String {
    let mut h = Sha256::new();
    for part in [&config.model, &bundle.system_text, &bundle.user_text] {
        h.update(part.as_bytes());
        h.update([0]);
    }
    format!("local-{}", &hex::encode(h.finalize())[..16])
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, bundle: &PromptBundle, config: &BackendConfig) -> Result<Reply, AttemptError> {
        let scripted = self.script.lock().expect("mock script lock").pop_front();
        let text = match scripted {
            Some(outcome) => outcome?,
            None => match &self.behavior {
                MockBehavior::EchoFirstAddedLine => echo_text(
                    diff_of(bundle).ok_or_else(|| AttemptError::Malformed("prompt has no diff section".into()))?,
                ),
                MockBehavior::Fixed(text) => text.clone(),
            },
        };
        Ok(Reply { text, request_id: Some(synthetic_request_id(config, bundle)), latency: Some(Duration::ZERO) })
    }
}
