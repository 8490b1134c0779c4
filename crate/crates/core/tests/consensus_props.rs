mod common;

use std::collections::HashMap;
use std::sync::Arc;

use proptest::prelude::*;
use skosmt_core::consensus::{fallback_pick, score, ConsensusRoute};
use skosmt_core::llm::mock::ScriptedLlm;
use skosmt_core::llm::{
    parse_llm_output, refine, LlmClient, LlmConfig, LlmError, LlmErrorKind, PromptContext, RefinementRoute,
};
use skosmt_core::provider::{Priority, RetryPolicy, TranslationCandidate};
use skosmt_core::skos::TaggedText;
use skosmt_core::text::canonical;

use common::tag;

const POOL: [&str; 6] = [
    "Analyse",
    "analyse",
    "Analysieren",
    "Auswertung",
    "Untersuchung",
    " Analyse",
];
const GARBAGE: [&str; 6] = [
    "",
    "   \n  ",
    "```python\nprint('Analyse')\n```\nfn main() {}",
    "def translate(x):\n    return x;",
    "Term to translate: Analyzing",
    "{\n}\n</answer>",
];

fn candidates() -> impl Strategy<Value = Vec<TranslationCandidate>> {
    prop::collection::vec(prop::sample::select(&POOL[..]), 1..9).prop_map(|texts| {
        texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| TranslationCandidate::new(t, format!("p{i}")))
            .collect()
    })
}

fn priority() -> Priority {
    Priority::from_order(&(0..9).map(|i| format!("p{i}")).collect::<Vec<_>>())
}

#[derive(Debug, Clone)]
enum Reply {
    Word(&'static str),
    Novel,
    Garbage(&'static str),
    Fail,
}

fn reply() -> impl Strategy<Value = Reply> {
    prop_oneof![
        prop::sample::select(&POOL[..]).prop_map(Reply::Word),
        Just(Reply::Novel),
        prop::sample::select(&GARBAGE[..]).prop_map(Reply::Garbage),
        Just(Reply::Fail),
    ]
}

fn script(replies: &[Reply]) -> ScriptedLlm {
    ScriptedLlm::new(replies.iter().map(|r| match r {
        Reply::Word(w) => Ok(format!("**{w}**")),
        Reply::Novel => Ok("Zergliederung".to_string()),
        Reply::Garbage(g) => Ok(g.to_string()),
        Reply::Fail => Err(LlmError::new(LlmErrorKind::Transport, "down")),
    }))
}

fn labels(n: usize) -> Vec<TaggedText> {
    ["Analyzing", "Analyser", "Analizzare"]
        .iter()
        .zip(["en", "fr", "it"])
        .take(n)
        .map(|(t, l)| TaggedText {
            text: t.to_string(),
            lang: tag(l),
        })
        .collect()
}

fn client(llm: ScriptedLlm) -> LlmClient {
    LlmClient::new(Arc::new(llm), &LlmConfig::default()).with_retry(RetryPolicy::immediate(0))
}

proptest! {
    #[test]
    fn consensus_ignores_candidate_order(
        (original, shuffled) in candidates().prop_flat_map(|c| (Just(c.clone()), Just(c).prop_shuffle())),
        threshold in 0.05f64..=1.0,
    ) {
        let a = score(&original, threshold, &priority()).unwrap();
        let b = score(&shuffled, threshold, &priority()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(fallback_pick(&shuffled, &priority()).unwrap(), a.best.clone());

        let mut counts: HashMap<String, usize> = HashMap::new();
        for c in &original {
            *counts.entry(canonical(&c.text)).or_default() += 1;
        }
        prop_assert_eq!(a.group_size, *counts.values().max().unwrap());
        prop_assert_eq!(a.confidence, a.group_size as f64 / original.len() as f64);
        prop_assert_eq!(a.route == ConsensusRoute::AcceptedByFrequency, a.confidence >= threshold);
    }

    #[test]
    fn fallback_is_always_a_candidate(c in candidates()) {
        let pick = fallback_pick(&c, &priority()).unwrap();
        prop_assert!(c.iter().any(|x| x.text == pick));
    }

    #[test]
    fn garbage_is_never_parsed(g in prop::sample::select(&GARBAGE[..])) {
        prop_assert_eq!(parse_llm_output(g, None), None);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn refinement_stays_within_candidates(
        primaries in candidates(),
        n_labels in 1usize..=3,
        replies in prop::collection::vec(reply(), 0..5),
    ) {
        let llm = client(script(&replies));
        let out = refine(&labels(n_labels), &primaries, &tag("de"), &PromptContext::default(), &llm, true, &priority())
            .unwrap();
        let allowed = primaries.iter().map(|c| &c.text).chain(&out.llm_translations).any(|t| *t == out.final_text);
        prop_assert!(allowed, "{:?} not in {:?} / {:?}", out.final_text, primaries, out.llm_translations);
        prop_assert!(out.llm_calls <= 2);
        prop_assert!(out.llm_requests as usize <= n_labels + 1);
    }

    #[test]
    fn garbage_replies_fall_back_to_frequency(
        primaries in candidates(),
        n_labels in 1usize..=3,
        replies in prop::collection::vec(
            prop_oneof![prop::sample::select(&GARBAGE[..]).prop_map(Reply::Garbage), Just(Reply::Fail)],
            0..5,
        ),
    ) {
        let llm = client(script(&replies));
        let out = refine(&labels(n_labels), &primaries, &tag("de"), &PromptContext::default(), &llm, true, &priority())
            .unwrap();
        prop_assert_eq!(out.route, RefinementRoute::FrequencyFallback);
        prop_assert_eq!(out.final_text, fallback_pick(&primaries, &priority()).unwrap());
    }
}
