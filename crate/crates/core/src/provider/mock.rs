//! Deterministic offline providers.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{ProviderError, ProviderErrorKind, Translator};
use crate::lang::LanguageTag;

/// Looks translations up in a fixed table keyed by
/// (source primary subtag, target primary subtag, source text).
#[derive(Debug, Clone, Default)]
pub struct DictionaryProvider {
    entries: HashMap<(String, String, String), String>,
}

impl DictionaryProvider {
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = (&'a str, &'a str, &'a str, &'a str)>) -> Self {
        let mut dict = Self::default();
        for (src, tgt, text, translation) in entries {
            dict.insert(src, tgt, text, translation);
        }
        dict
    }

    pub fn insert(&mut self, src: &str, tgt: &str, text: &str, translation: &str) {
        self.entries.insert(
            (primary(src), primary(tgt), text.trim().to_string()),
            translation.to_string(),
        );
    }

    /// Reads a tab-separated file: `src_lang  tgt_lang  source  translation`.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path)?;
        let mut dict = Self::default();
        for (n, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [src, tgt, text, translation] = cols[..] else {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{}:{}: expected 4 tab-separated columns", path.display(), n + 1),
                ));
            };
            dict.insert(src, tgt, text, translation);
        }
        Ok(dict)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn primary(tag: &str) -> String {
    LanguageTag::parse(tag)
        .map(|t| t.primary().to_string())
        .unwrap_or_else(|_| tag.to_ascii_lowercase())
}

impl Translator for DictionaryProvider {
    fn translate(&self, text: &str, source: &LanguageTag, target: &LanguageTag) -> Result<String, ProviderError> {
        let key = (
            source.primary().to_string(),
            target.primary().to_string(),
            text.trim().to_string(),
        );
        self.entries.get(&key).cloned().ok_or_else(|| {
            ProviderError::new(
                ProviderErrorKind::MalformedResponse,
                format!("no dictionary entry for `{text}` ({source} -> {target})"),
            )
        })
    }
}

/// Returns the input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoProvider;

impl Translator for EchoProvider {
    fn translate(&self, text: &str, _: &LanguageTag, _: &LanguageTag) -> Result<String, ProviderError> {
        Ok(text.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dict.tsv");
        fs::write(
            &path,
            "# comment\nen\tde\tAnalyzing\tAnalyse\nEN-GB\tde\tWriting\tSchreiben\n\n",
        )
        .unwrap();
        let dict = DictionaryProvider::load(&path).unwrap();
        assert_eq!(dict.len(), 2);
        let (en, de) = (LanguageTag::parse("en").unwrap(), LanguageTag::parse("de").unwrap());
        assert_eq!(dict.translate("Writing", &en, &de).unwrap(), "Schreiben");
        assert_eq!(
            dict.translate("Reading", &en, &de).unwrap_err().kind,
            ProviderErrorKind::MalformedResponse
        );

        fs::write(&path, "en\tde\tonly three\n").unwrap();
        assert!(DictionaryProvider::load(&path).is_err());
    }

    #[test]
    fn echo() {
        let t = LanguageTag::parse("en").unwrap();
        assert_eq!(
            EchoProvider.translate("Crowdsourcing", &t, &t).unwrap(),
            "Crowdsourcing"
        );
    }
}
