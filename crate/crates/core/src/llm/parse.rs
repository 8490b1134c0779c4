use crate::text::{loose_key, normalize_response};

const MAX_WORDS: usize = 8;

const ECHO_MARKERS: &[&str] = &[
    "term to translate",
    "description of the term",
    "description of the vocabulary",
    "additional context:",
    "possible translations to",
    "coming from translation systems",
    "you are a ",
    "return only",
    "best fitting translation",
    "criteria for high accuracy",
];

const CODE_MARKERS: &[&str] = &[
    "def ",
    "fn ",
    "function ",
    "function(",
    "import ",
    "#include",
    "print(",
    "console.",
    "return ",
    "=>",
    "::",
    "</",
    "/>",
    " = ",
    "==",
    "();",
];

fn looks_like_code(line: &str) -> bool {
    line.contains('{') || line.contains('}') || line.ends_with(';') || CODE_MARKERS.iter().any(|m| line.contains(m))
}

fn echoes_prompt(line: &str) -> bool {
    let lower = line.to_lowercase();
    ECHO_MARKERS.iter().any(|m| lower.contains(m))
}

fn strip_markup(line: &str) -> &str {
    let mut s = line.trim();
    loop {
        let before = s;
        s = s.trim_start_matches('#').trim_start();
        for marker in ["- ", "* ", "+ ", "> "] {
            s = s.strip_prefix(marker).unwrap_or(s);
        }
        if let Some((num, rest)) = s.split_once(". ") {
            if !num.is_empty() && num.chars().all(|c| c.is_ascii_digit()) {
                s = rest;
            }
        }
        for wrap in ["**", "__", "*", "_", "`"] {
            if s.len() > 2 * wrap.len() && s.starts_with(wrap) && s.ends_with(wrap) {
                s = &s[wrap.len()..s.len() - wrap.len()];
            }
        }
        s = s.trim();
        if s == before {
            return s;
        }
    }
}

fn clean_line(line: &str) -> String {
    let s = normalize_response(strip_markup(line));
    let s = s.trim_end_matches(['.', ',', ';', ':', '!', '?', '\u{3002}']);
    normalize_response(s)
}

/// Extracts a single term from a possibly verbose model response.
///
/// Lines inside code fences, lines that look like code and lines restating
/// the prompt are discarded before the extraction rules run.
pub fn parse_llm_output(raw: &str, expected: Option<&[String]>) -> Option<String> {
    let mut in_fence = false;
    let mut fenced_only = true;
    let mut lines = Vec::new();
    for line in raw.lines() {
        let t = line.trim();
        if t.starts_with("```") {
            in_fence = !in_fence;
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let cleaned = clean_line(t);
        if cleaned.is_empty() || looks_like_code(&cleaned) || echoes_prompt(&cleaned) {
            continue;
        }
        if !in_fence {
            fenced_only = false;
        }
        lines.push((in_fence, cleaned));
    }
    // fenced text is only trusted when nothing else was said
    if !fenced_only {
        lines.retain(|(fenced, _)| !fenced);
    }
    let lines: Vec<String> = lines.into_iter().map(|(_, l)| l).collect();

    match lines.as_slice() {
        [] => None,
        [only] => Some(only.clone()),
        [first, ..] => {
            if let Some(expected) = expected {
                let keys: Vec<String> = expected.iter().map(|e| loose_key(e)).collect();
                if let Some(hit) = lines.iter().find(|l| keys.contains(&loose_key(l))) {
                    return Some(hit.clone());
                }
            }
            (first.split_whitespace().count() <= MAX_WORDS).then(|| first.clone())
        }
    }
}
