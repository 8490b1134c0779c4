use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use skosmt_core::llm::{LlmClient, LlmConfig, LlmRegistry, API_KEY_ENV};
use skosmt_core::pipeline::{Pipeline, PipelineConfig};
use skosmt_core::provider::TranslationCache;
use skosmt_core::skos::{LabelProperty, RdfFormat};
use skosmt_core::LanguageTag;

use crate::args::{RunArgs, DEFAULT_CACHE_PATH};
use crate::config::FileConfig;
use crate::registry::build_registry;
use crate::CliError;

pub fn language(raw: &str, what: &str) -> Result<LanguageTag, CliError> {
    LanguageTag::parse(raw).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

/// Flags merged over the config file over built-in defaults.
#[derive(Debug)]
pub struct RunSettings {
    pub pipeline: PipelineConfig,
    pub llm: Option<LlmConfig>,
    pub cache: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub format: RdfFormat,
    pub out_format: Option<RdfFormat>,
    pub out: Option<PathBuf>,
    pub audit_log: Option<PathBuf>,
}

impl RunSettings {
    pub fn resolve(target: LanguageTag, a: &RunArgs, f: &FileConfig) -> Result<Self, CliError> {
        let mut p = PipelineConfig::new(target);
        if let Some(prop) = a.prop.as_ref().or(f.prop.as_ref()) {
            p.prop = LabelProperty::parse(prop).map_err(|e| CliError::Config(format!("--prop: {e}")))?;
        }
        p.threshold = a.threshold.or(f.threshold).unwrap_or(p.threshold);
        p.min_translations = a.min_translations.or(f.min_translations).unwrap_or(p.min_translations);
        p.max_inflight = a.max_inflight.or(f.max_inflight).unwrap_or(p.max_inflight);
        p.provider_order = a.providers.clone().or_else(|| f.providers.clone());
        p.skip_existing = !(a.force || f.force.unwrap_or(false));
        p.mark_generated = a.mark_generated || f.mark_generated.unwrap_or(false);
        p.user_context = a.context.clone().or_else(|| f.context.clone());
        p.assume_source_lang = a
            .assume_source_lang
            .as_deref()
            .or(f.assume_source_lang.as_deref())
            .map(|l| language(l, "--assume-source-lang"))
            .transpose()?;
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let no_llm = a.no_llm || f.no_llm.unwrap_or(false);
        let llm = if no_llm { None } else { Some(llm_config(a, f)?) };
        let no_cache = a.no_cache || f.no_cache.unwrap_or(false);
        Ok(Self {
            pipeline: p,
            llm,
            cache: (!no_cache).then(|| {
                a.cache
                    .clone()
                    .or_else(|| f.cache.clone())
                    .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_PATH))
            }),
            dictionary: a.dictionary.clone(),
            format: a.format.or(f.format).map_or(RdfFormat::Auto, Into::into),
            out_format: a.out_format.or(f.out_format).map(Into::into),
            out: a.out.clone().or_else(|| f.out.clone()),
            audit_log: a.audit_log.clone().or_else(|| f.audit_log.clone()),
        })
    }

    /// Builds providers, cache and language model. Nothing touches the
    /// network here.
    pub fn build_pipeline(&self, file: &FileConfig) -> Result<Pipeline, CliError> {
        let registry = build_registry(file, self.dictionary.as_deref())?;
        let mut hub = self
            .pipeline
            .build_hub(&registry)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(path) = &self.cache {
            let cache = TranslationCache::open(path)
                .map_err(|e| CliError::Config(format!("cannot open cache {}: {e}", path.display())))?;
            hub = hub.with_cache(Arc::new(cache));
        }
        let llm = match &self.llm {
            None => None,
            Some(cfg) => {
                let model = LlmRegistry::default()
                    .build(cfg)
                    .map_err(|e| CliError::Config(format!("{e} (set {API_KEY_ENV} or pass --no-llm)")))?;
                Some(LlmClient::new(model, cfg))
            }
        };
        let repeat = self.llm.as_ref().is_none_or(|c| c.repeat_instructions);
        Pipeline::new(self.pipeline.clone(), hub, llm)
            .map(|p| p.with_repeat_instructions(repeat))
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

fn llm_config(a: &RunArgs, f: &FileConfig) -> Result<LlmConfig, CliError> {
    let s = &f.llm;
    let d = LlmConfig::default();
    let timeout = match s.timeout_secs {
        Some(t) => Duration::try_from_secs_f64(t)
            .map_err(|_| CliError::Config(format!("llm.timeout_secs must be positive, got {t}")))?,
        None => d.timeout,
    };
    let cfg = LlmConfig {
        adapter: a.llm_adapter.clone().or_else(|| s.adapter.clone()).unwrap_or(d.adapter),
        model_id: a.llm_model.clone().or_else(|| s.model.clone()).unwrap_or(d.model_id),
        temperature: a.llm_temperature.or(s.temperature).unwrap_or(d.temperature),
        endpoint: a
            .llm_endpoint
            .clone()
            .or_else(|| s.endpoint.clone())
            .unwrap_or(d.endpoint),
        max_retries: s.max_retries.unwrap_or(d.max_retries),
        timeout,
        supports_system_prompt: s.supports_system_prompt.unwrap_or(d.supports_system_prompt),
        repeat_instructions: s.repeat_instructions.unwrap_or(d.repeat_instructions),
    };
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}
