use serde::{Deserialize, Serialize};

use super::{build_selection_prompt, build_translation_prompt, parse_llm_output, LlmClient, Prompt, PromptContext};
use crate::consensus::{fallback_pick, ConsensusError};
use crate::lang::LanguageTag;
use crate::provider::{Priority, TranslationCandidate};
use crate::skos::TaggedText;
use crate::text::loose_key;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefinementRoute {
    LlmTranslationMatched,
    LlmSelection,
    FrequencyFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementOutcome {
    pub final_text: String,
    pub route: RefinementRoute,
    /// Rounds that reached the model: translation, then selection.
    pub llm_calls: u32,
    /// Individual prompts sent (one per source label, plus the selection).
    pub llm_requests: u32,
    pub llm_translations: Vec<String>,
    pub prompts: Vec<Prompt>,
    pub raw_responses: Vec<String>,
    pub errors: Vec<String>,
}

impl RefinementOutcome {
    fn new() -> Self {
        Self {
            final_text: String::new(),
            route: RefinementRoute::FrequencyFallback,
            llm_calls: 0,
            llm_requests: 0,
            llm_translations: Vec::new(),
            prompts: Vec::new(),
            raw_responses: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn ask(&mut self, llm: &LlmClient, prompt: Prompt) -> Option<String> {
        self.llm_requests += 1;
        let res = llm.complete(&prompt);
        self.prompts.push(prompt);
        match res {
            Ok(raw) => {
                self.raw_responses.push(raw.clone());
                Some(raw)
            }
            Err(e) => {
                log::warn!("{e}");
                self.errors.push(e.to_string());
                None
            }
        }
    }
}

/// Runs LLM translation, candidate matching, selection and fallback for one
/// term. The result is always one of the primaries or a parsed LLM
/// translation.
pub fn refine(
    labels: &[TaggedText],
    primaries: &[TranslationCandidate],
    target: &LanguageTag,
    ctx: &PromptContext,
    llm: &LlmClient,
    repeat_instructions: bool,
    priority: &Priority,
) -> Result<RefinementOutcome, ConsensusError> {
    let fallback = fallback_pick(primaries, priority)?;
    let mut out = RefinementOutcome::new();
    let primary_texts: Vec<String> = primaries.iter().map(|c| c.text.clone()).collect();

    for label in labels {
        let prompt = build_translation_prompt(&label.text, &label.lang, target, ctx, repeat_instructions);
        if let Some(raw) = out.ask(llm, prompt) {
            if let Some(t) = parse_llm_output(&raw, Some(&primary_texts)) {
                out.llm_translations.push(t);
            }
        }
    }
    if out.llm_requests > 0 {
        out.llm_calls = 1;
    }
    let answered = out.raw_responses.len();

    let keys: Vec<String> = out.llm_translations.iter().map(|t| loose_key(t)).collect();
    let matched: Vec<TranslationCandidate> = primaries
        .iter()
        .filter(|c| keys.contains(&loose_key(&c.text)))
        .cloned()
        .collect();
    if !matched.is_empty() {
        out.final_text = fallback_pick(&matched, priority)?;
        out.route = RefinementRoute::LlmTranslationMatched;
        return Ok(out);
    }

    if answered > 0 || labels.is_empty() {
        let mut options = primary_texts;
        options.extend(out.llm_translations.iter().cloned());
        let source = labels.first().map_or("", |l| l.text.as_str());
        if let Ok(prompt) = build_selection_prompt(target, &options, source, ctx, repeat_instructions) {
            let listed = match &prompt.kind {
                super::PromptKind::Selection { options } => options.clone(),
                _ => unreachable!(),
            };
            out.llm_calls += 1;
            if let Some(raw) = out.ask(llm, prompt) {
                let choice = parse_llm_output(&raw, Some(&listed)).map(|c| loose_key(&c));
                let listed_key = choice.filter(|k| listed.iter().any(|o| loose_key(o) == *k));
                if let Some(hit) = listed_key.and_then(|k| options.iter().find(|o| loose_key(o) == k)) {
                    out.final_text = hit.clone();
                    out.route = RefinementRoute::LlmSelection;
                    return Ok(out);
                }
            }
        }
    }

    out.final_text = fallback;
    out.route = RefinementRoute::FrequencyFallback;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::mock::ScriptedLlm;
    use crate::llm::{LlmConfig, LlmError, LlmErrorKind, PromptKind};
    use crate::provider::RetryPolicy;
    use std::sync::Arc;

    fn tag(s: &str) -> LanguageTag {
        LanguageTag::parse(s).unwrap()
    }

    fn fig1() -> (Vec<TaggedText>, Vec<TranslationCandidate>, Priority) {
        let labels = vec![TaggedText {
            text: "marginal gloss".into(),
            lang: tag("en"),
        }];
        let c = [
            ("Randnotiz", "p1"),
            ("Marginalglosse", "p2"),
            ("Glosse", "p3"),
            ("Marginalie", "p4"),
        ]
        .iter()
        .map(|(t, p)| TranslationCandidate::new(*t, *p))
        .collect();
        (labels, c, Priority::from_order(&["p1", "p2", "p3", "p4"]))
    }

    fn client(script: Vec<Result<&str, LlmError>>) -> LlmClient {
        let model = ScriptedLlm::new(script.into_iter().map(|r| r.map(str::to_string)));
        LlmClient::new(Arc::new(model), &LlmConfig::default()).with_retry(RetryPolicy::immediate(0))
    }

    fn run(llm: &LlmClient) -> RefinementOutcome {
        let (labels, c, p) = fig1();
        refine(&labels, &c, &tag("de"), &PromptContext::default(), llm, false, &p).unwrap()
    }

    #[test]
    fn matched_translation_uses_primary_surface() {
        let out = run(&client(vec![Ok("marginalie.")]));
        assert_eq!(out.route, RefinementRoute::LlmTranslationMatched);
        assert_eq!(out.final_text, "Marginalie");
        assert_eq!(out.llm_calls, 1);
    }

    #[test]
    fn selection_after_unmatched_translation() {
        let llm = client(vec![Ok("Randglosse"), Ok("The best fitting one is:\nMarginalie")]);
        let out = run(&llm);
        assert_eq!(out.route, RefinementRoute::LlmSelection);
        assert_eq!(out.final_text, "Marginalie");
        assert_eq!(out.llm_calls, 2);
        assert_eq!(out.raw_responses.len(), 2);
        match &out.prompts[1].kind {
            PromptKind::Selection { options } => assert_eq!(options.last().unwrap(), "Randglosse"),
            _ => panic!(),
        }
    }

    #[test]
    fn selection_may_pick_llm_translation() {
        let out = run(&client(vec![Ok("Randglosse"), Ok("randglosse")]));
        assert_eq!(out.route, RefinementRoute::LlmSelection);
        assert_eq!(out.final_text, "Randglosse");
    }

    #[test]
    fn garbage_twice_falls_back() {
        let garbage = "def f():\n    return {}";
        let out = run(&client(vec![Ok(garbage), Ok(garbage)]));
        assert_eq!(out.route, RefinementRoute::FrequencyFallback);
        assert_eq!(out.final_text, "Randnotiz");
        assert_eq!(out.llm_calls, 2);
    }

    #[test]
    fn invalid_selection_falls_back() {
        let out = run(&client(vec![Ok("Randglosse"), Ok("Notiz")]));
        assert_eq!(out.route, RefinementRoute::FrequencyFallback);
        assert_eq!(out.final_text, "Randnotiz");
    }

    #[test]
    fn transport_failure_falls_back_without_selection() {
        let err = LlmError::new(LlmErrorKind::Transport, "down");
        let out = run(&client(vec![Err(err)]));
        assert_eq!(out.route, RefinementRoute::FrequencyFallback);
        assert_eq!(out.llm_calls, 1);
        assert_eq!(out.llm_requests, 1);
        assert_eq!(out.errors.len(), 1);
    }

    #[test]
    fn several_labels_prefer_the_largest_group() {
        let labels = vec![
            TaggedText {
                text: "gloss".into(),
                lang: tag("en"),
            },
            TaggedText {
                text: "glose".into(),
                lang: tag("fr"),
            },
        ];
        let c: Vec<_> = [("Glosse", "a"), ("Randnotiz", "b"), ("Randnotiz", "c")]
            .iter()
            .map(|(t, p)| TranslationCandidate::new(*t, *p))
            .collect();
        let llm = client(vec![Ok("Glosse"), Ok("Randnotiz")]);
        let out = refine(
            &labels,
            &c,
            &tag("de"),
            &PromptContext::default(),
            &llm,
            false,
            &Priority::from_order(&["a", "b", "c"]),
        )
        .unwrap();
        assert_eq!(out.final_text, "Randnotiz");
        assert_eq!(out.llm_calls, 1);
        assert_eq!(out.llm_requests, 2);
    }

    #[test]
    fn empty_primaries_is_an_error() {
        let llm = client(vec![]);
        let (labels, _, p) = fig1();
        assert!(refine(&labels, &[], &tag("de"), &PromptContext::default(), &llm, false, &p).is_err());
    }
}
