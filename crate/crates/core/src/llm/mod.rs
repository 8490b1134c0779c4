//! Language-model refinement for terms the providers disagree on.

pub mod chat;
pub mod mock;
mod parse;
mod prompt;
mod refine;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::parse::parse_llm_output;
pub use self::prompt::{
    build_selection_prompt, build_translation_prompt, format_candidate_list, split_candidate_list, PromptContext,
    PromptError,
};
pub use self::refine::{refine, RefinementOutcome, RefinementRoute};
use crate::provider::RetryPolicy;

pub const DEFAULT_MODEL: &str = "gemini-2.0-flash";
pub const DEFAULT_ENDPOINT: &str = "https://generativelanguage.googleapis.com/v1beta/openai/chat/completions";
pub const API_KEY_ENV: &str = "WOKIE_LLM_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    /// Registered adapter name (`chat_completion`, `mock_echo`, ...).
    pub adapter: String,
    pub model_id: String,
    pub temperature: f64,
    pub endpoint: String,
    pub max_retries: u32,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub supports_system_prompt: bool,
    /// Repeat the instructions at the head of the user input even when a
    /// separate system channel exists.
    pub repeat_instructions: bool,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            adapter: chat::ADAPTER_NAME.to_string(),
            model_id: DEFAULT_MODEL.to_string(),
            temperature: 0.0,
            endpoint: DEFAULT_ENDPOINT.to_string(),
            max_retries: 3,
            timeout: Duration::from_secs(30),
            supports_system_prompt: true,
            repeat_instructions: true,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(format!("llm temperature must be >= 0, got {}", self.temperature));
        }
        if self.timeout.is_zero() {
            return Err("llm timeout must be positive".to_string());
        }
        if self.model_id.trim().is_empty() {
            return Err("llm model id is empty".to_string());
        }
        Ok(())
    }
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

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PromptKind {
    Translation { term: String },
    Selection { options: Vec<String> },
}

/// An instruction/input pair. `kind` is metadata for adapters and audit
/// logs; it is never sent to the model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prompt {
    pub kind: PromptKind,
    pub instructions: String,
    pub input: String,
}

impl Prompt {
    pub fn char_len(&self) -> usize {
        self.instructions.chars().count() + self.input.chars().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmErrorKind {
    Transport,
    RateLimited,
    Auth,
    MalformedResponse,
}

#[derive(Debug, Clone, Error)]
#[error("llm {kind:?}: {message}")]
pub struct LlmError {
    pub kind: LlmErrorKind,
    pub message: String,
    pub retry_after: Option<Duration>,
}

impl LlmError {
    pub fn new(kind: LlmErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            retry_after: None,
        }
    }

    pub fn is_retryable(&self) -> bool {
        matches!(self.kind, LlmErrorKind::Transport | LlmErrorKind::RateLimited)
    }
}

/// A chat-style model returning raw text for a prompt.
pub trait LanguageModel: Send + Sync {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError>;
}

impl<F> LanguageModel for F
where
    F: Fn(&Prompt) -> Result<String, LlmError> + Send + Sync,
{
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        self(prompt)
    }
}

pub type LlmFactory = fn(&LlmConfig) -> Result<Arc<dyn LanguageModel>, LlmError>;

/// Adapters by name.
#[derive(Clone)]
pub struct LlmRegistry {
    factories: BTreeMap<String, LlmFactory>,
}

impl Default for LlmRegistry {
    fn default() -> Self {
        let mut r = Self {
            factories: BTreeMap::new(),
        };
        r.register(chat::ADAPTER_NAME, chat::factory);
        r.register(mock::ECHO_ADAPTER_NAME, mock::echo_factory);
        r
    }
}

impl LlmRegistry {
    pub fn register(&mut self, name: &str, factory: LlmFactory) -> bool {
        self.factories.insert(name.to_string(), factory).is_none()
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(&self, cfg: &LlmConfig) -> Result<Arc<dyn LanguageModel>, LlmError> {
        let factory = self.factories.get(&cfg.adapter).ok_or_else(|| {
            LlmError::new(
                LlmErrorKind::Auth,
                format!(
                    "unknown llm adapter `{}` (known: {})",
                    cfg.adapter,
                    self.names().join(", ")
                ),
            )
        })?;
        factory(cfg)
    }
}

#[derive(Debug, Default)]
struct Counters {
    prompts: AtomicU64,
    attempts: AtomicU64,
    failures: AtomicU64,
    request_chars: AtomicU64,
    response_chars: AtomicU64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LlmUsage {
    pub prompts: u64,
    pub attempts: u64,
    pub failures: u64,
    pub request_chars: u64,
    pub response_chars: u64,
}

/// A model plus retry policy and usage accounting.
pub struct LlmClient {
    model: Arc<dyn LanguageModel>,
    retry: RetryPolicy,
    counters: Counters,
}

impl LlmClient {
    pub fn new(model: Arc<dyn LanguageModel>, cfg: &LlmConfig) -> Self {
        Self {
            model,
            retry: RetryPolicy {
                max_retries: cfg.max_retries,
                ..RetryPolicy::default()
            },
            counters: Counters::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        let c = &self.counters;
        c.prompts.fetch_add(1, Ordering::Relaxed);
        let mut attempt = 0;
        loop {
            c.attempts.fetch_add(1, Ordering::Relaxed);
            c.request_chars.fetch_add(prompt.char_len() as u64, Ordering::Relaxed);
            match self.model.complete(prompt) {
                Ok(text) => {
                    c.response_chars
                        .fetch_add(text.chars().count() as u64, Ordering::Relaxed);
                    return Ok(text);
                }
                Err(e) if e.is_retryable() && attempt < self.retry.max_retries => {
                    let wait = self.retry.delay(attempt, e.retry_after);
                    log::debug!("{e}; retrying in {wait:?}");
                    attempt += 1;
                    if !wait.is_zero() {
                        thread::sleep(wait);
                    }
                }
                Err(e) => {
                    c.failures.fetch_add(1, Ordering::Relaxed);
                    return Err(e);
                }
            }
        }
    }

    pub fn usage(&self) -> LlmUsage {
        let c = &self.counters;
        LlmUsage {
            prompts: c.prompts.load(Ordering::Relaxed),
            attempts: c.attempts.load(Ordering::Relaxed),
            failures: c.failures.load(Ordering::Relaxed),
            request_chars: c.request_chars.load(Ordering::Relaxed),
            response_chars: c.response_chars.load(Ordering::Relaxed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicUsize;

    fn prompt() -> Prompt {
        Prompt {
            kind: PromptKind::Translation { term: "x".into() },
            instructions: "ab".into(),
            input: "cde".into(),
        }
    }

    #[test]
    fn retries_transport_errors_and_counts_chars() {
        let n = Arc::new(AtomicUsize::new(0));
        let model = {
            let n = Arc::clone(&n);
            move |_: &Prompt| {
                if n.fetch_add(1, Ordering::SeqCst) == 0 {
                    Err(LlmError::new(LlmErrorKind::Transport, "reset"))
                } else {
                    Ok("Marginalie".to_string())
                }
            }
        };
        let client = LlmClient::new(Arc::new(model), &LlmConfig::default()).with_retry(RetryPolicy::immediate(3));
        assert_eq!(client.complete(&prompt()).unwrap(), "Marginalie");
        let u = client.usage();
        assert_eq!((u.prompts, u.attempts, u.failures), (1, 2, 0));
        assert_eq!((u.request_chars, u.response_chars), (10, 10));
    }

    #[test]
    fn gives_up_after_max_retries() {
        let model = |_: &Prompt| -> Result<String, LlmError> { Err(LlmError::new(LlmErrorKind::RateLimited, "429")) };
        let client = LlmClient::new(Arc::new(model), &LlmConfig::default()).with_retry(RetryPolicy::immediate(2));
        assert!(client.complete(&prompt()).is_err());
        assert_eq!(client.usage().attempts, 3);
        assert_eq!(client.usage().failures, 1);
    }

    #[test]
    fn config_validation_and_registry() {
        assert_eq!(LlmConfig::default().temperature, 0.0);
        assert!(LlmConfig::default().validate().is_ok());
        let bad = LlmConfig {
            temperature: -0.5,
            ..LlmConfig::default()
        };
        assert!(bad.validate().is_err());
        let reg = LlmRegistry::default();
        assert_eq!(reg.names(), ["chat_completion", "mock_echo"]);
        let unknown = LlmConfig {
            adapter: "nope".into(),
            ..LlmConfig::default()
        };
        assert!(reg.build(&unknown).is_err());
    }
}
