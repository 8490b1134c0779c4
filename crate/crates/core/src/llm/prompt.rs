use serde::Serialize;
use thiserror::Error;

use super::{Prompt, PromptKind};
use crate::lang::LanguageTag;
use crate::text::loose_key;

/// Optional context blocks embedded after the term.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PromptContext {
    pub term_description: Option<String>,
    pub scheme_description: Option<String>,
    pub user_context: Option<String>,
}

impl PromptContext {
    fn blocks(&self) -> Vec<(&'static str, &str)> {
        [
            (
                "Description of the term that should be translated:",
                &self.term_description,
            ),
            (
                "Description of the vocabulary the term belongs to:",
                &self.scheme_description,
            ),
            ("Additional context:", &self.user_context),
        ]
        .into_iter()
        .filter_map(|(head, v)| v.as_deref().map(str::trim).filter(|s| !s.is_empty()).map(|s| (head, s)))
        .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks().is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("selection needs at least two distinct candidates, got {0}")]
    TooFewCandidates(usize),
}

fn term_section(source_text: &str, ctx: &PromptContext) -> String {
    let mut s = format!("Term to translate: {}", source_text.trim());
    for (head, body) in ctx.blocks() {
        s.push_str("\n\n");
        s.push_str(head);
        s.push('\n');
        s.push_str(body);
    }
    s
}

fn assemble(kind: PromptKind, instructions: String, input: String, repeat_instructions: bool) -> Prompt {
    let input = if repeat_instructions {
        format!("{instructions}\n\n{input}")
    } else {
        input
    };
    Prompt {
        kind,
        instructions,
        input,
    }
}

/// `repeat_instructions` copies the instructions to the head of the input;
/// adapters without a system channel always need it.
pub fn build_translation_prompt(
    source_text: &str,
    _source_lang: &LanguageTag,
    target_lang: &LanguageTag,
    ctx: &PromptContext,
    repeat_instructions: bool,
) -> Prompt {
    let mut instructions = format!(
        "You are a machine translation system that translates a term from any language to {}.",
        target_lang.english_name()
    );
    if !ctx.is_empty() {
        instructions.push_str(" To determine the correct context, use the provided additional details.");
    }
    instructions.push_str(" Return only the translated term and nothing else.");
    assemble(
        PromptKind::Translation {
            term: source_text.trim().to_string(),
        },
        instructions,
        term_section(source_text, ctx),
        repeat_instructions,
    )
}

/// Distinct candidates in first-seen order, compared case-insensitively.
fn distinct(candidates: &[String]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    candidates
        .iter()
        .map(|c| c.trim())
        .filter(|c| !c.is_empty() && seen.insert(loose_key(c)))
        .map(str::to_string)
        .collect()
}

pub fn build_selection_prompt(
    target_lang: &LanguageTag,
    candidates: &[String],
    source_text: &str,
    ctx: &PromptContext,
    repeat_instructions: bool,
) -> Result<Prompt, PromptError> {
    let options = distinct(candidates);
    if options.len() < 2 {
        return Err(PromptError::TooFewCandidates(options.len()));
    }
    let lang = target_lang.english_name();
    let instructions = "You are a professional translation review system that assesses the quality of \
translations of a single term given in different source languages. The translations are already given \
by a translation system. Give me the best fitting translation out of the given list.\n\n\
Criteria for high accuracy are:\n\
- The best fitting translation is already found in the already given possible translations\n\
- In the current context, there is no possible translation that has a different meaning.\n\n\
Only give me the best fitting translation, copied exactly as it appears in the list, and nothing else."
        .to_string();
    let input = format!(
        "Choose the best fitting translation to {lang}.\n\n{}\n\n\
The possible translations to {lang} coming from translation systems are:\n{}",
        term_section(source_text, ctx),
        format_candidate_list(&options),
    );
    Ok(assemble(
        PromptKind::Selection { options },
        instructions,
        input,
        repeat_instructions,
    ))
}

/// Comma-separated list; entries containing a comma or quote are
/// double-quoted with inner quotes doubled.
pub fn format_candidate_list(options: &[String]) -> String {
    options
        .iter()
        .map(|o| {
            if o.contains(',') || o.contains('"') {
                format!("\"{}\"", o.replace('"', "\"\""))
            } else {
                o.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Inverse of [`format_candidate_list`].
pub fn split_candidate_list(list: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = list.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' if quoted => quoted = false,
            '"' if cur.trim().is_empty() => {
                cur.clear();
                quoted = true;
            }
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}
