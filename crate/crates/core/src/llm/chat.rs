//! OpenAI-style chat-completion adapter. Most hosted models (Gemini,
//! DeepSeek, Mistral, GPT, Claude via gateways) accept this request shape.

use std::env;
use std::sync::Arc;
use std::time::Duration;

use reqwest::blocking::Client;
use serde_json::{json, Value};

use super::{LanguageModel, LlmConfig, LlmError, LlmErrorKind, Prompt, API_KEY_ENV};

pub const ADAPTER_NAME: &str = "chat_completion";

pub struct ChatCompletion {
    client: Client,
    endpoint: String,
    model: String,
    temperature: f64,
    system: bool,
    api_key: Option<String>,
}

impl ChatCompletion {
    pub fn new(cfg: &LlmConfig, api_key: Option<String>) -> Result<Self, LlmError> {
        let client = Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| LlmError::new(LlmErrorKind::Transport, e.to_string()))?;
        Ok(Self {
            client,
            endpoint: cfg.endpoint.clone(),
            model: cfg.model_id.clone(),
            temperature: cfg.temperature,
            system: cfg.supports_system_prompt,
            api_key,
        })
    }

    fn body(&self, prompt: &Prompt) -> Value {
        let messages = if self.system {
            json!([
                {"role": "system", "content": prompt.instructions},
                {"role": "user", "content": prompt.input},
            ])
        } else {
            json!([{"role": "user", "content": prompt.input}])
        };
        json!({"model": self.model, "temperature": self.temperature, "messages": messages})
    }
}

/// Requires the key up front so a run fails before the first prompt.
pub fn factory(cfg: &LlmConfig) -> Result<Arc<dyn LanguageModel>, LlmError> {
    let key = env::var(API_KEY_ENV)
        .ok()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| LlmError::new(LlmErrorKind::Auth, format!("{API_KEY_ENV} is not set")))?;
    Ok(Arc::new(ChatCompletion::new(cfg, Some(key))?))
}

fn transport(e: reqwest::Error) -> LlmError {
    LlmError::new(LlmErrorKind::Transport, e.to_string())
}

impl LanguageModel for ChatCompletion {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        let key = self
            .api_key
            .as_deref()
            .ok_or_else(|| LlmError::new(LlmErrorKind::Auth, format!("missing API key (set {API_KEY_ENV})")))?;
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(key)
            .json(&self.body(prompt))
            .send()
            .map_err(transport)?;
        let status = response.status();
        let retry_after = response
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = response.text().map_err(transport)?;
        if !status.is_success() {
            let kind = match status.as_u16() {
                429 => LlmErrorKind::RateLimited,
                401 | 403 => LlmErrorKind::Auth,
                408 | 500..=599 => LlmErrorKind::Transport,
                _ => LlmErrorKind::MalformedResponse,
            };
            let snippet: String = text.chars().take(200).collect();
            let mut err = LlmError::new(kind, format!("HTTP {status}: {snippet}"));
            err.retry_after = retry_after;
            return Err(err);
        }
        let body: Value = serde_json::from_str(&text)
            .map_err(|e| LlmError::new(LlmErrorKind::MalformedResponse, format!("invalid JSON: {e}")))?;
        body.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| LlmError::new(LlmErrorKind::MalformedResponse, "no choices[0].message.content"))
    }
}
