//! Language tags as they appear on RDF literals and in provider requests.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentinel tag for literals that carry no language tag.
pub const UNDETERMINED: &str = "und";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed language tag `{0}`")]
pub struct LanguageTagError(pub String);

/// A BCP 47 language tag, stored lowercase.
///
/// Equality and ordering use the full tag. Lookups that should treat
/// `en-GB` and `en` as the same language go through [`LanguageTag::primary`]
/// or [`LanguageTag::same_language`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageTag(String);

impl LanguageTag {
    pub fn parse(raw: &str) -> Result<Self, LanguageTagError> {
        let tag = raw.trim().to_ascii_lowercase();
        let mut parts = tag.split('-');
        let primary = parts.next().unwrap_or_default();
        if !(2..=8).contains(&primary.len()) || !primary.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(LanguageTagError(raw.to_string()));
        }
        for sub in parts {
            if sub.is_empty() || sub.len() > 8 || !sub.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(LanguageTagError(raw.to_string()));
            }
        }
        Ok(Self(tag))
    }

    pub fn undetermined() -> Self {
        Self(UNDETERMINED.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The primary subtag (`de` for `de-AT`).
    pub fn primary(&self) -> &str {
        self.0.split('-').next().unwrap_or(&self.0)
    }

    pub fn is_undetermined(&self) -> bool {
        self.primary() == UNDETERMINED
    }

    pub fn same_language(&self, other: &LanguageTag) -> bool {
        self.primary() == other.primary()
    }

    /// English display name used in prompts; falls back to the tag itself.
    pub fn english_name(&self) -> &str {
        match self.primary() {
            "ar" => "Arabic",
            "bg" => "Bulgarian",
            "ca" => "Catalan",
            "cs" => "Czech",
            "da" => "Danish",
            "de" => "German",
            "el" => "Greek",
            "en" => "English",
            "es" => "Spanish",
            "et" => "Estonian",
            "fi" => "Finnish",
            "fr" => "French",
            "ga" => "Irish",
            "he" => "Hebrew",
            "hr" => "Croatian",
            "hu" => "Hungarian",
            "it" => "Italian",
            "ja" => "Japanese",
            "ko" => "Korean",
            "la" => "Latin",
            "lt" => "Lithuanian",
            "lv" => "Latvian",
            "nl" => "Dutch",
            "no" | "nb" => "Norwegian",
            "pl" => "Polish",
            "pt" => "Portuguese",
            "ro" => "Romanian",
            "ru" => "Russian",
            "sk" => "Slovak",
            "sl" => "Slovenian",
            "sr" => "Serbian",
            "sv" => "Swedish",
            "tr" => "Turkish",
            "uk" => "Ukrainian",
            "zh" => "Chinese",
            _ => self.primary(),
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for LanguageTag {
    type Err = LanguageTagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl TryFrom<String> for LanguageTag {
    type Error = LanguageTagError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse(&value)
    }
}

impl From<LanguageTag> for String {
    fn from(tag: LanguageTag) -> Self {
        tag.0
    }
}
