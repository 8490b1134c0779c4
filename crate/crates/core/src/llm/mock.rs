//! Deterministic offline language models.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use super::{LanguageModel, LlmConfig, LlmError, LlmErrorKind, Prompt, PromptKind};

pub const ECHO_ADAPTER_NAME: &str = "mock_echo";

/// Replays a fixed sequence of responses, one per call.
#[derive(Debug, Default)]
pub struct ScriptedLlm {
    script: Mutex<VecDeque<Result<String, LlmError>>>,
    seen: Mutex<Vec<Prompt>>,
}

impl ScriptedLlm {
    pub fn new(script: impl IntoIterator<Item = Result<String, LlmError>>) -> Self {
        Self {
            script: Mutex::new(script.into_iter().collect()),
            seen: Mutex::default(),
        }
    }

    pub fn replies<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self::new(replies.into_iter().map(|r| Ok(r.into())))
    }

    pub fn prompts(&self) -> Vec<Prompt> {
        self.seen.lock().unwrap().clone()
    }
}

impl LanguageModel for ScriptedLlm {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        self.seen.lock().unwrap().push(prompt.clone());
        self.script
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| Err(LlmError::new(LlmErrorKind::MalformedResponse, "script exhausted")))
    }
}

/// Answers translation prompts with the source term and selection prompts
/// with the first listed option.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoLlm;

impl LanguageModel for EchoLlm {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        Ok(match &prompt.kind {
            PromptKind::Translation { term } => term.clone(),
            PromptKind::Selection { options } => options.first().cloned().unwrap_or_default(),
        })
    }
}

pub fn echo_factory(_: &LlmConfig) -> Result<Arc<dyn LanguageModel>, LlmError> {
    Ok(Arc::new(EchoLlm))
}
