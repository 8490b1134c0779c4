//! Per-term orchestration: gather provider candidates, score them, refine
//! disagreements with a language model and write the results back.

mod report;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::report::{write_audit_log, AuditRecord, LatencySummary, RunReport, UncoveredLabel};
use crate::consensus::{fallback_pick, score, ConsensusRoute};
use crate::lang::LanguageTag;
use crate::llm::{refine, LlmClient, PromptContext, RefinementOutcome, RefinementRoute};
use crate::provider::{duration_micros, ProviderHub, ProviderRegistry, RegistryError, TranslationCandidate};
use crate::skos::{ConceptId, LabelProperty, TaggedText, Term, Thesaurus};

pub const DEFAULT_THRESHOLD: f64 = 0.6;
pub const DEFAULT_MIN_TRANSLATIONS: usize = 5;
pub const DEFAULT_MAX_INFLIGHT: usize = 8;
/// Below this many agreeing candidates a direct acceptance is considered weak.
pub const MIN_AGREEING_CANDIDATES: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub target_lang: LanguageTag,
    pub prop: LabelProperty,
    pub threshold: f64,
    pub min_translations: usize,
    /// `None` uses the default priority filtered to registered providers.
    pub provider_order: Option<Vec<String>>,
    pub skip_existing: bool,
    pub max_inflight: usize,
    /// Language assumed for untagged source literals; without it they are skipped.
    pub assume_source_lang: Option<LanguageTag>,
    pub mark_generated: bool,
    pub user_context: Option<String>,
}

impl PipelineConfig {
    pub fn new(target_lang: LanguageTag) -> Self {
        Self {
            target_lang,
            prop: LabelProperty::pref_label(),
            threshold: DEFAULT_THRESHOLD,
            min_translations: DEFAULT_MIN_TRANSLATIONS,
            provider_order: None,
            skip_existing: true,
            max_inflight: DEFAULT_MAX_INFLIGHT,
            assume_source_lang: None,
            mark_generated: false,
            user_context: None,
        }
    }

    /// Checks hard constraints and returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return invalid(format!("threshold must be in (0, 1], got {}", self.threshold));
        }
        if self.min_translations < 1 {
            return invalid("min_translations must be at least 1".into());
        }
        if self.max_inflight < 1 {
            return invalid("max_inflight must be at least 1".into());
        }
        if self.target_lang.is_undetermined() {
            return invalid("target language must not be `und`".into());
        }
        if self
            .assume_source_lang
            .as_ref()
            .is_some_and(LanguageTag::is_undetermined)
        {
            return invalid("assumed source language must not be `und`".into());
        }
        let mut warnings = Vec::new();
        let product = self.threshold * self.min_translations as f64;
        if product < MIN_AGREEING_CANDIDATES - 1e-9 {
            warnings.push(format!(
                "threshold x min_translations = {product:.2} is below {MIN_AGREEING_CANDIDATES}; \
                 direct acceptance may rest on fewer than three agreeing candidates"
            ));
        }
        Ok(warnings)
    }

    pub fn resolve_order(&self, registry: &ProviderRegistry) -> Result<Vec<String>, ConfigError> {
        Ok(registry.resolve_order(self.provider_order.as_deref())?)
    }

    pub fn build_hub(&self, registry: &ProviderRegistry) -> Result<ProviderHub, ConfigError> {
        let order = self.resolve_order(registry)?;
        Ok(ProviderHub::new(registry, &order)?)
    }

    /// Labels to translate from: every language except the target; untagged
    /// ones only with an assumed source language.
    pub fn source_labels(&self, term: &Term) -> Vec<TaggedText> {
        let mut out = Vec::new();
        for (lang, texts) in &term.labels {
            let lang = if lang.is_undetermined() {
                match &self.assume_source_lang {
                    Some(assumed) => assumed.clone(),
                    None => {
                        log::warn!("{}: skipping untagged label(s)", term.id);
                        continue;
                    }
                }
            } else {
                lang.clone()
            };
            if lang.same_language(&self.target_lang) {
                continue;
            }
            out.extend(texts.iter().map(|t| TaggedText {
                text: t.clone(),
                lang: lang.clone(),
            }));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermRoute {
    AcceptedByFrequency,
    LlmTranslationMatched,
    LlmSelection,
    FrequencyFallback,
    Untranslated,
    SkippedExisting,
}

impl TermRoute {
    pub const ALL: [TermRoute; 6] = [
        TermRoute::AcceptedByFrequency,
        TermRoute::LlmTranslationMatched,
        TermRoute::LlmSelection,
        TermRoute::FrequencyFallback,
        TermRoute::Untranslated,
        TermRoute::SkippedExisting,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TermRoute::AcceptedByFrequency => "accepted_by_frequency",
            TermRoute::LlmTranslationMatched => "llm_translation_matched",
            TermRoute::LlmSelection => "llm_selection",
            TermRoute::FrequencyFallback => "frequency_fallback",
            TermRoute::Untranslated => "untranslated",
            TermRoute::SkippedExisting => "skipped_existing",
        }
    }
}

impl From<RefinementRoute> for TermRoute {
    fn from(r: RefinementRoute) -> Self {
        match r {
            RefinementRoute::LlmTranslationMatched => TermRoute::LlmTranslationMatched,
            RefinementRoute::LlmSelection => TermRoute::LlmSelection,
            RefinementRoute::FrequencyFallback => TermRoute::FrequencyFallback,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    #[serde(with = "duration_micros")]
    pub gather: Duration,
    #[serde(with = "duration_micros")]
    pub consensus: Duration,
    #[serde(with = "duration_micros")]
    pub refine: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.gather + self.consensus + self.refine
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Gathered {
    pub candidates: Vec<TranslationCandidate>,
    /// Source labels no provider translated.
    pub uncovered: Vec<TaggedText>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermOutcome {
    pub iri: ConceptId,
    pub final_text: Option<String>,
    pub route: TermRoute,
    /// Provider of the accepted surface form, when it came from a provider.
    pub provider_id: Option<String>,
    pub confidence: Option<f64>,
    pub candidates: Vec<TranslationCandidate>,
    pub uncovered: Vec<TaggedText>,
    pub refinement: Option<RefinementOutcome>,
    pub timings: StageTimings,
}

impl TermOutcome {
    fn bare(term: &Term, route: TermRoute) -> Self {
        Self {
            iri: term.id.clone(),
            final_text: None,
            route,
            provider_id: None,
            confidence: None,
            candidates: Vec::new(),
            uncovered: Vec::new(),
            refinement: None,
            timings: StageTimings::default(),
        }
    }

    pub fn llm_calls(&self) -> u32 {
        self.refinement.as_ref().map_or(0, |r| r.llm_calls)
    }
}

/// Configured pipeline bound to a provider hub and optional language model.
pub struct Pipeline {
    cfg: PipelineConfig,
    hub: ProviderHub,
    llm: Option<LlmClient>,
    repeat_instructions: bool,
    warnings: Vec<String>,
}

pub type ProgressFn<'a> = dyn Fn(usize, usize, &TermOutcome) + Sync + 'a;

impl Pipeline {
    pub fn new(cfg: PipelineConfig, hub: ProviderHub, llm: Option<LlmClient>) -> Result<Self, ConfigError> {
        let warnings = cfg.validate()?;
        if hub.is_empty() {
            return Err(ConfigError::Invalid("no translation providers configured".into()));
        }
        Ok(Self {
            cfg,
            hub,
            llm,
            repeat_instructions: true,
            warnings,
        })
    }

    /// Whether prompt instructions are also prepended to the input.
    pub fn with_repeat_instructions(mut self, repeat: bool) -> Self {
        self.repeat_instructions = repeat;
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn hub(&self) -> &ProviderHub {
        &self.hub
    }

    pub fn llm(&self) -> Option<&LlmClient> {
        self.llm.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Queries providers in priority order until there are at least
    /// `min_translations` candidates and every label has one, or providers
    /// run out. While below the minimum a provider translates every label it
    /// supports; afterwards only labels still lacking a translation.
    pub fn gather_candidates(&self, labels: &[TaggedText]) -> Gathered {
        let target = &self.cfg.target_lang;
        let min = self.cfg.min_translations;
        let mut out = Gathered::default();
        let mut covered = vec![false; labels.len()];
        for p in 0..self.hub.len() {
            let below_min = out.candidates.len() < min;
            if !below_min && covered.iter().all(|c| *c) {
                break;
            }
            for (i, label) in labels.iter().enumerate() {
                if (!below_min && covered[i]) || !self.hub.supports(p, &label.lang, target) {
                    continue;
                }
                match self.hub.translate(p, &label.text, &label.lang, target) {
                    Ok(c) => {
                        covered[i] = true;
                        out.candidates.push(c);
                    }
                    Err(e) => {
                        log::warn!("{}: `{}` ({}): {e}", e.provider_id, label.text, label.lang);
                        out.failures += 1;
                    }
                }
            }
        }
        out.uncovered = labels
            .iter()
            .zip(&covered)
            .filter(|(_, c)| !**c)
            .map(|(l, _)| l.clone())
            .collect();
        out
    }

    pub fn prompt_context(
        &self,
        term: &Term,
        scheme_description: Option<&str>,
        labels: &[TaggedText],
    ) -> PromptContext {
        let term_description = if self.cfg.prop == LabelProperty::definition() {
            None
        } else {
            let langs: Vec<&LanguageTag> = labels.iter().map(|l| &l.lang).collect();
            term.definition_for(&langs).map(str::to_string)
        };
        PromptContext {
            term_description,
            scheme_description: scheme_description.map(str::to_string),
            user_context: self.cfg.user_context.clone(),
        }
    }

    /// Decides the translation for one term without touching the graph.
    pub fn translate_term(&self, term: &Term, scheme_description: Option<&str>) -> TermOutcome {
        let target = &self.cfg.target_lang;
        if self.cfg.skip_existing && term.has_language(target) {
            return TermOutcome::bare(term, TermRoute::SkippedExisting);
        }
        let labels = self.cfg.source_labels(term);
        let mut out = TermOutcome::bare(term, TermRoute::Untranslated);

        let start = Instant::now();
        let gathered = self.gather_candidates(&labels);
        out.timings.gather = start.elapsed();
        out.uncovered = gathered.uncovered;
        out.candidates = gathered.candidates;
        if out.candidates.is_empty() {
            return out;
        }

        let priority = self.hub.priority();
        let start = Instant::now();
        let scored = score(&out.candidates, self.cfg.threshold, &priority).expect("candidates are non-empty");
        out.timings.consensus = start.elapsed();
        out.confidence = Some(scored.confidence);

        if scored.route == ConsensusRoute::AcceptedByFrequency {
            out.route = TermRoute::AcceptedByFrequency;
            out.final_text = Some(scored.best);
            out.provider_id = Some(scored.provider_id);
            return out;
        }

        let start = Instant::now();
        let final_text = match &self.llm {
            Some(llm) => {
                let ctx = self.prompt_context(term, scheme_description, &labels);
                let refined = refine(
                    &labels,
                    &out.candidates,
                    target,
                    &ctx,
                    llm,
                    self.repeat_instructions,
                    &priority,
                )
                .expect("candidates are non-empty");
                out.route = refined.route.into();
                let text = refined.final_text.clone();
                out.refinement = Some(refined);
                text
            }
            None => {
                out.route = TermRoute::FrequencyFallback;
                fallback_pick(&out.candidates, &priority).expect("candidates are non-empty")
            }
        };
        out.timings.refine = start.elapsed();
        out.provider_id = out
            .candidates
            .iter()
            .filter(|c| c.text == final_text)
            .min_by_key(|c| priority.rank(&c.provider_id))
            .map(|c| c.provider_id.clone());
        out.final_text = Some(final_text);
        out
    }

    /// Translates every term concurrently, then writes results in IRI order.
    pub fn run(&self, thesaurus: &Thesaurus) -> (Thesaurus, RunReport, Vec<TermOutcome>) {
        self.run_with_progress(thesaurus, &|_, _, _| {})
    }

    pub fn run_with_progress(
        &self,
        thesaurus: &Thesaurus,
        progress: &ProgressFn<'_>,
    ) -> (Thesaurus, RunReport, Vec<TermOutcome>) {
        let started = Instant::now();
        let terms = thesaurus.extract_terms(&self.cfg.prop);
        let scheme = thesaurus.scheme_description.as_deref();
        let next = AtomicUsize::new(0);
        let done = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<TermOutcome>>> = Mutex::new(vec![None; terms.len()]);
        let workers = self.cfg.max_inflight.min(terms.len()).max(1);
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(term) = terms.get(i) else { break };
                    let outcome = self.translate_term(term, scheme);
                    let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                    progress(n, terms.len(), &outcome);
                    results.lock().unwrap()[i] = Some(outcome);
                });
            }
        });
        let mut outcomes: Vec<TermOutcome> = results
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|o| o.expect("every term processed"))
            .collect();
        outcomes.sort_by(|a, b| a.iri.cmp(&b.iri));

        let mut enriched = thesaurus.clone();
        let mut written = 0;
        for outcome in &outcomes {
            let Some(text) = &outcome.final_text else { continue };
            let id = &outcome.iri;
            match enriched.add_translation(id, &self.cfg.prop, text, &self.cfg.target_lang) {
                Ok(new) => {
                    written += usize::from(new);
                    if self.cfg.mark_generated {
                        if let Err(e) = enriched.mark_generated(id) {
                            log::warn!("{id}: {e}");
                        }
                    }
                }
                Err(e) => log::warn!("{id}: {e}"),
            }
        }
        let report = RunReport::build(self, &outcomes, written, started.elapsed());
        (enriched, report, outcomes)
    }
}

/// Convenience wrapper: builds the hub from `registry` and runs the pipeline.
pub fn translate_thesaurus(
    thesaurus: &Thesaurus,
    cfg: PipelineConfig,
    registry: &ProviderRegistry,
    llm: Option<LlmClient>,
) -> Result<(Thesaurus, RunReport), ConfigError> {
    let hub = cfg.build_hub(registry)?;
    let pipeline = Pipeline::new(cfg, hub, llm)?;
    let (enriched, report, _) = pipeline.run(thesaurus);
    Ok((enriched, report))
}
