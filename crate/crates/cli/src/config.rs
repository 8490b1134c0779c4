//! TOML configuration file. Every flag has a key here; relative paths are
//! resolved against the directory of the file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::FormatArg;
use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub target_lang: Option<String>,
    pub prop: Option<String>,
    pub threshold: Option<f64>,
    pub min_translations: Option<usize>,
    pub providers: Option<Vec<String>>,
    pub max_inflight: Option<usize>,
    pub force: Option<bool>,
    pub mark_generated: Option<bool>,
    pub assume_source_lang: Option<String>,
    pub context: Option<String>,
    pub no_llm: Option<bool>,
    pub cache: Option<PathBuf>,
    pub no_cache: Option<bool>,
    pub format: Option<FormatArg>,
    pub out_format: Option<FormatArg>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub audit_log: Option<PathBuf>,

    pub strip_lang: Option<String>,
    pub measures: Option<String>,
    pub csv: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub embedding_vocab_size: Option<usize>,
    pub embedding_dim: Option<usize>,

    #[serde(default)]
    pub llm: LlmSection,
    #[serde(default)]
    pub provider: BTreeMap<String, ProviderSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSection {
    pub adapter: Option<String>,
    pub model: Option<String>,
    pub endpoint: Option<String>,
    pub temperature: Option<f64>,
    pub max_retries: Option<u32>,
    pub timeout_secs: Option<f64>,
    pub supports_system_prompt: Option<bool>,
    pub repeat_instructions: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderSection {
    pub endpoint: Option<String>,
    pub region: Option<String>,
    pub timeout_secs: Option<f64>,
    /// Requests per second.
    pub rate_limit: Option<f64>,
    /// Only for `mock_dict`.
    pub dictionary: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let raw = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&raw).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn parse(raw: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(raw)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        for p in [
            &mut self.cache,
            &mut self.out,
            &mut self.report,
            &mut self.audit_log,
            &mut self.csv,
            &mut self.embeddings,
        ] {
            fix(p);
        }
        for section in self.provider.values_mut() {
            fix(&mut section.dictionary);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg = FileConfig::parse(
            r#"
target_lang = "de"
threshold = 0.8
providers = ["google", "mock_dict"]

[llm]
model = "gpt-4.1-mini"
timeout_secs = 10

[provider.google]
rate_limit = 2.5
timeout_secs = 5

[provider.mock_dict]
dictionary = "dict.tsv"
"#,
        )
        .unwrap();
        assert_eq!(cfg.threshold, Some(0.8));
        assert_eq!(cfg.llm.model.as_deref(), Some("gpt-4.1-mini"));
        assert_eq!(cfg.provider["google"].rate_limit, Some(2.5));
        assert_eq!(cfg.providers.unwrap(), ["google", "mock_dict"]);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(FileConfig::parse("treshold = 0.6").is_err());
        assert!(FileConfig::parse("[llm]\napi_key = \"x\"").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("skosmt.toml");
        fs::write(
            &path,
            "cache = \"c.jsonl\"\n[provider.mock_dict]\ndictionary = \"/abs/d.tsv\"\n",
        )
        .unwrap();
        let cfg = FileConfig::load(Some(&path)).unwrap();
        assert_eq!(cfg.cache.unwrap(), dir.path().join("c.jsonl"));
        assert_eq!(
            cfg.provider["mock_dict"].dictionary.as_deref(),
            Some(Path::new("/abs/d.tsv"))
        );
    }
}
