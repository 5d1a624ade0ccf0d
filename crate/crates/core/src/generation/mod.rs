//! Prompt rendering and commit-message generation against a pluggable
//! chat-completion backend.

mod backend;
mod prompt;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backend::{
    echo_text, parse_reply, synthetic_request_id, AttemptError, Backend, BackendConfig, HttpBackend, MockBackend,
    MockBehavior, Reply, API_KEY_ENV,
};
pub use prompt::{
    build_prompt, diff_of, Mode, PromptBundle, PromptError, CONTEXT_HEADER, DEFAULT_MAX_PROMPT_CHARS, DIFF_HEADER,
    TEMPLATE_ID,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerationError {
    #[error("invalid backend configuration: {0}")]
    Config(String),
    #[error("authentication failed (HTTP {0}); check {API_KEY_ENV}")]
    Auth(u16),
    #[error("timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("backend rejected the request (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    Malformed(String),
    #[error("backend returned an empty generation")]
    EmptyGeneration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedMessage {
    pub text: String,
    pub mode: Mode,
    pub model_name: String,
    /// Seconds.
    pub latency: f64,
    pub request_id: String,
    pub retries: u32,
}

/// Trims whitespace and one surrounding code fence.
pub fn clean_reply(text: &str) -> String {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("```") {
        if let (Some(nl), true) = (rest.find('\n'), rest.ends_with("```")) {
            let inner = &rest[nl + 1..rest.len() - 3];
            return inner.trim().to_string();
        }
    }
    t.to_string()
}

/// One generation with retries on timeouts and transient failures.
pub fn generate_message(
    bundle: &PromptBundle,
    config: &BackendConfig,
    backend: &dyn Backend,
) -> Result<GeneratedMessage, GenerationError> {
    config.validate().map_err(GenerationError::Config)?;
    let mut retries = 0;
    loop {
        let started = Instant::now();
        match backend.complete(bundle, config) {
            Ok(reply) => {
                let latency = reply.latency.unwrap_or_else(|| started.elapsed());
                let text = clean_reply(&reply.text);
                if text.is_empty() {
                    return Err(GenerationError::EmptyGeneration);
                }
                return Ok(GeneratedMessage {
                    text,
                    mode: bundle.mode,
                    model_name: config.model.clone(),
                    latency: latency.as_secs_f64(),
                    request_id: reply.request_id.unwrap_or_else(|| synthetic_request_id(config, bundle)),
                    retries,
                });
            }
            Err(e) if e.is_retryable() && retries < config.max_retries => {
                retries += 1;
                let delay = config.backoff_for(retries);
                log::warn!("{} backend: {e}; retry {retries}/{} in {delay:?}", backend.name(), config.max_retries);
                std::thread::sleep(delay);
            }
            Err(e) => {
                let attempts = retries + 1;
                return Err(match e {
                    AttemptError::Auth(status) => GenerationError::Auth(status),
                    AttemptError::Timeout => GenerationError::Timeout { attempts },
                    AttemptError::Transient(last) => GenerationError::RetriesExhausted { attempts, last },
                    AttemptError::Rejected { status, body } => GenerationError::Rejected { status, body },
                    AttemptError::Malformed(m) => GenerationError::Malformed(m),
                });
            }
        }
    }
}

/// Generates for every bundle with at most `concurrency` requests in
/// flight. Results are in submission order.
pub fn generate_batch(
    bundles: &[PromptBundle],
    config: &BackendConfig,
    backend: &dyn Backend,
    concurrency: usize,
) -> Vec<Result<GeneratedMessage, GenerationError>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(concurrency.max(1)).build();
    match pool {
        Ok(pool) => pool.install(|| bundles.par_iter().map(|b| generate_message(b, config, backend)).collect()),
        Err(_) => bundles.iter().map(|b| generate_message(b, config, backend)).collect(),
    }
}

/// Default config with no backoff, for tests and the mock backend.
pub fn immediate(config: BackendConfig) -> BackendConfig {
    BackendConfig { backoff: Duration::ZERO, ..config }
}
