//! String normalization shared by providers, consensus and evaluation.

use unicode_normalization::UnicodeNormalization;

const QUOTE_PAIRS: &[(char, char)] = &[
    ('"', '"'),
    ('\'', '\''),
    ('`', '`'),
    ('\u{201C}', '\u{201D}'), // “ ”
    ('\u{201E}', '\u{201C}'), // „ “
    ('\u{2018}', '\u{2019}'), // ‘ ’
    ('\u{201A}', '\u{2018}'), // ‚ ‘
    ('\u{00AB}', '\u{00BB}'), // « »
    ('\u{00BB}', '\u{00AB}'), // » «
];

pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Trims whitespace, strips matching surrounding quote pairs and collapses
/// internal whitespace runs to a single space.
pub fn normalize_response(raw: &str) -> String {
    let mut s = raw.trim();
    loop {
        let stripped = strip_quote_pair(s).map(str::trim);
        match stripped {
            Some(inner) if !inner.is_empty() => s = inner,
            _ => break,
        }
    }
    collapse_whitespace(s)
}

fn strip_quote_pair(s: &str) -> Option<&str> {
    let first = s.chars().next()?;
    let last = s.chars().next_back()?;
    if s.chars().count() < 2 {
        return None;
    }
    QUOTE_PAIRS
        .iter()
        .any(|&(open, close)| first == open && last == close)
        .then(|| &s[first.len_utf8()..s.len() - last.len_utf8()])
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Grouping key for frequency consensus: NFC, trimmed, case kept.
pub fn canonical(s: &str) -> String {
    s.trim().nfc().collect()
}

/// Matching key that also ignores case (full Unicode case folding).
pub fn loose_key(s: &str) -> String {
    let folded = caseless::default_case_fold_str(&canonical(s));
    folded.nfc().collect()
}

pub fn loosely_equal(a: &str, b: &str) -> bool {
    loose_key(a) == loose_key(b)
}
