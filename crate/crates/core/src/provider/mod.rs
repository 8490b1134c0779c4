//! Machine-translation providers behind one trait, a name-keyed registry and
//! a hub that adds capability checks, caching, rate limiting and retries.

pub mod cache;
pub mod http;
pub mod mock;
pub mod retry;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::cache::{CacheKey, TranslationCache};
pub use self::retry::{RetryPolicy, TokenBucket};
use crate::lang::LanguageTag;
use crate::text::normalize_response;

/// Recommended provider order when the user does not configure one.
pub const DEFAULT_PRIORITY: [&str; 8] = [
    "lingvanex",
    "google",
    "modernmt",
    "microsoft",
    "yandex",
    "argos",
    "reverso",
    "pons",
];

pub const DEFAULT_RATE_LIMIT: f64 = 5.0;

pub fn default_priority() -> Vec<String> {
    DEFAULT_PRIORITY.iter().map(|s| s.to_string()).collect()
}

/// A translation service backend.
pub trait Translator: Send + Sync {
    /// Returns the raw translated text. Normalization, caching and retries
    /// are applied by [`ProviderHub`].
    fn translate(&self, text: &str, source: &LanguageTag, target: &LanguageTag) -> Result<String, ProviderError>;
}

impl<F> Translator for F
where
    F: Fn(&str, &LanguageTag, &LanguageTag) -> Result<String, ProviderError> + Send + Sync,
{
    fn translate(&self, text: &str, source: &LanguageTag, target: &LanguageTag) -> Result<String, ProviderError> {
        self(text, source, target)
    }
}

/// Which (source, target) pairs a provider handles, by primary subtag.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LanguageSupport {
    #[default]
    Any,
    /// Both languages must be in the set.
    Languages(BTreeSet<String>),
    /// Neither language may be in the set.
    Excluding(BTreeSet<String>),
    Pairs(BTreeSet<(String, String)>),
}

impl LanguageSupport {
    pub fn languages<I: IntoIterator<Item = S>, S: Into<String>>(langs: I) -> Self {
        Self::Languages(langs.into_iter().map(Into::into).collect())
    }

    pub fn excluding<I: IntoIterator<Item = S>, S: Into<String>>(langs: I) -> Self {
        Self::Excluding(langs.into_iter().map(Into::into).collect())
    }

    pub fn pairs<I: IntoIterator<Item = (S, S)>, S: Into<String>>(pairs: I) -> Self {
        Self::Pairs(pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect())
    }

    pub fn supports(&self, source: &LanguageTag, target: &LanguageTag) -> bool {
        let (s, t) = (source.primary(), target.primary());
        if s == t || source.is_undetermined() {
            return false;
        }
        match self {
            Self::Any => true,
            Self::Languages(set) => set.contains(s) && set.contains(t),
            Self::Excluding(set) => !set.contains(s) && !set.contains(t),
            Self::Pairs(pairs) => pairs.contains(&(s.to_string(), t.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProviderDescriptor {
    pub id: String,
    /// 1 = queried first. Assigned by the hub from the effective order.
    pub priority: usize,
    pub supported_pairs: LanguageSupport,
    pub requires_key: bool,
    /// Requests per second; `None` disables limiting.
    pub rate_limit: Option<f64>,
}

impl ProviderDescriptor {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            priority: 0,
            supported_pairs: LanguageSupport::Any,
            requires_key: false,
            rate_limit: None,
        }
    }

    pub fn with_support(mut self, support: LanguageSupport) -> Self {
        self.supported_pairs = support;
        self
    }

    pub fn with_rate_limit(mut self, per_second: Option<f64>) -> Self {
        self.rate_limit = per_second;
        self
    }

    pub fn requiring_key(mut self) -> Self {
        self.requires_key = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderErrorKind {
    RateLimited,
    UnsupportedPair,
    Network,
    MalformedResponse,
    Auth,
}

impl ProviderErrorKind {
    pub fn is_retryable(self) -> bool {
        matches!(self, Self::RateLimited | Self::Network)
    }
}

impl fmt::Display for ProviderErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::RateLimited => "rate limited",
            Self::UnsupportedPair => "unsupported language pair",
            Self::Network => "network error",
            Self::MalformedResponse => "malformed response",
            Self::Auth => "authentication failed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Error)]
#[error("{provider_id}: {kind}: {message}")]
pub struct ProviderError {
    pub kind: ProviderErrorKind,
    pub provider_id: String,
    pub message: String,
    pub retry_after: Option<Duration>,
}

impl ProviderError {
    pub fn new(kind: ProviderErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            provider_id: String::new(),
            message: message.into(),
            retry_after: None,
        }
    }

    pub fn with_retry_after(mut self, retry_after: Option<Duration>) -> Self {
        self.retry_after = retry_after;
        self
    }

    pub fn is_retryable(&self) -> bool {
        self.kind.is_retryable()
    }
}

/// One provider's proposed translation of one source label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationCandidate {
    pub text: String,
    pub provider_id: String,
    pub source_text: String,
    pub source_lang: LanguageTag,
    #[serde(with = "duration_micros")]
    pub latency: Duration,
}

impl TranslationCandidate {
    pub fn new(text: impl Into<String>, provider_id: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            provider_id: provider_id.into(),
            source_text: String::new(),
            source_lang: LanguageTag::undetermined(),
            latency: Duration::ZERO,
        }
    }
}

pub(crate) mod duration_micros {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_micros() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_micros)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("provider `{0}` is already registered")]
    DuplicateProvider(String),
    #[error("unknown provider `{0}` in provider order")]
    UnknownProvider(String),
    #[error("provider `{0}` listed twice in provider order")]
    RepeatedProvider(String),
    #[error("provider order is empty")]
    EmptyOrder,
}

#[derive(Clone)]
pub struct RegisteredProvider {
    pub descriptor: ProviderDescriptor,
    translator: Arc<dyn Translator>,
}

/// Providers available by name. Mock and HTTP providers register the same way.
#[derive(Clone, Default)]
pub struct ProviderRegistry {
    entries: Vec<RegisteredProvider>,
}

impl ProviderRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        mut descriptor: ProviderDescriptor,
        implementation: Arc<dyn Translator>,
    ) -> Result<(), RegistryError> {
        if self.get(&descriptor.id).is_some() {
            return Err(RegistryError::DuplicateProvider(descriptor.id));
        }
        descriptor.priority = self.entries.len() + 1;
        self.entries.push(RegisteredProvider {
            descriptor,
            translator: implementation,
        });
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&RegisteredProvider> {
        self.entries.iter().find(|e| e.descriptor.id == id)
    }

    /// Registered ids in registration order.
    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.descriptor.id.as_str()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Effective provider order. An explicit list is used verbatim (every id
    /// must be registered); otherwise the recommended order restricted to
    /// registered providers, followed by any remaining registered ids.
    pub fn resolve_order(&self, configured: Option<&[String]>) -> Result<Vec<String>, RegistryError> {
        match configured {
            Some(list) => {
                if list.is_empty() {
                    return Err(RegistryError::EmptyOrder);
                }
                let mut seen = BTreeSet::new();
                for id in list {
                    if self.get(id).is_none() {
                        return Err(RegistryError::UnknownProvider(id.clone()));
                    }
                    if !seen.insert(id.as_str()) {
                        return Err(RegistryError::RepeatedProvider(id.clone()));
                    }
                }
                Ok(list.to_vec())
            }
            None => {
                let mut order: Vec<String> = DEFAULT_PRIORITY
                    .iter()
                    .filter(|id| self.get(id).is_some())
                    .map(|s| s.to_string())
                    .collect();
                for id in self.ids() {
                    if !order.iter().any(|o| o == id) {
                        order.push(id.to_string());
                    }
                }
                Ok(order)
            }
        }
    }
}

/// Provider rank used for deterministic tie-breaking. Unknown ids rank last.
#[derive(Debug, Clone, Default)]
pub struct Priority {
    ranks: HashMap<String, usize>,
}

impl Priority {
    pub fn from_order<S: AsRef<str>>(order: &[S]) -> Self {
        Self {
            ranks: order
                .iter()
                .enumerate()
                .map(|(i, id)| (id.as_ref().to_string(), i + 1))
                .collect(),
        }
    }

    pub fn rank(&self, provider_id: &str) -> usize {
        self.ranks.get(provider_id).copied().unwrap_or(usize::MAX)
    }
}

#[derive(Debug, Default)]
struct ProviderCounters {
    requests: AtomicU64,
    network_calls: AtomicU64,
    cache_hits: AtomicU64,
    failures: AtomicU64,
    latency_micros: AtomicU64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProviderStats {
    /// Successful and failed translation requests (cache hits included).
    pub requests: u64,
    /// Backend invocations, retries included.
    pub network_calls: u64,
    pub cache_hits: u64,
    pub failures: u64,
    /// Mean wall time per request, in milliseconds.
    pub mean_latency_ms: f64,
}

struct ActiveProvider {
    descriptor: ProviderDescriptor,
    translator: Arc<dyn Translator>,
    limiter: Option<TokenBucket>,
    counters: ProviderCounters,
}

/// The active, ordered provider set for one run.
pub struct ProviderHub {
    providers: Vec<ActiveProvider>,
    cache: Option<Arc<TranslationCache>>,
    retry: RetryPolicy,
}

impl ProviderHub {
    pub fn new(registry: &ProviderRegistry, order: &[String]) -> Result<Self, RegistryError> {
        let order = registry.resolve_order(Some(order))?;
        let providers = order
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let entry = registry.get(id).expect("resolved ids are registered");
                let mut descriptor = entry.descriptor.clone();
                descriptor.priority = i + 1;
                ActiveProvider {
                    limiter: descriptor.rate_limit.filter(|r| *r > 0.0).map(TokenBucket::new),
                    descriptor,
                    translator: Arc::clone(&entry.translator),
                    counters: ProviderCounters::default(),
                }
            })
            .collect();
        Ok(Self {
            providers,
            cache: None,
            retry: RetryPolicy::default(),
        })
    }

    pub fn with_cache(mut self, cache: Arc<TranslationCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &ProviderDescriptor> {
        self.providers.iter().map(|p| &p.descriptor)
    }

    pub fn len(&self) -> usize {
        self.providers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.providers.is_empty()
    }

    pub fn priority(&self) -> Priority {
        let ids: Vec<&str> = self.providers.iter().map(|p| p.descriptor.id.as_str()).collect();
        Priority::from_order(&ids)
    }

    pub fn supports(&self, index: usize, source: &LanguageTag, target: &LanguageTag) -> bool {
        self.providers[index]
            .descriptor
            .supported_pairs
            .supports(source, target)
    }

    /// Translates through the provider at `index` (priority order).
    pub fn translate(
        &self,
        index: usize,
        text: &str,
        source: &LanguageTag,
        target: &LanguageTag,
    ) -> Result<TranslationCandidate, ProviderError> {
        let provider = &self.providers[index];
        let id = provider.descriptor.id.as_str();
        let fail = |mut e: ProviderError| {
            e.provider_id = id.to_string();
            provider.counters.failures.fetch_add(1, Ordering::Relaxed);
            e
        };
        if !provider.descriptor.supported_pairs.supports(source, target) {
            return Err(fail(ProviderError::new(
                ProviderErrorKind::UnsupportedPair,
                format!("{} -> {}", source, target),
            )));
        }
        provider.counters.requests.fetch_add(1, Ordering::Relaxed);
        let start = Instant::now();
        let key = CacheKey::new(id, source.as_str(), target.as_str(), text);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            provider.counters.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(self.candidate(provider, hit, text, source, start));
        }

        let mut attempt = 0;
        let raw = loop {
            if let Some(limiter) = &provider.limiter {
                limiter.acquire();
            }
            provider.counters.network_calls.fetch_add(1, Ordering::Relaxed);
            match provider.translator.translate(text, source, target) {
                Ok(raw) => break raw,
                Err(e) if e.is_retryable() && attempt < self.retry.max_retries => {
                    let wait = self.retry.delay(attempt, e.retry_after);
                    log::debug!("{id}: {e}; retrying in {wait:?}");
                    attempt += 1;
                    if !wait.is_zero() {
                        thread::sleep(wait);
                    }
                }
                Err(e) => return Err(fail(e)),
            }
        };
        let normalized = normalize_response(&raw);
        if normalized.is_empty() {
            return Err(fail(ProviderError::new(
                ProviderErrorKind::MalformedResponse,
                "empty translation",
            )));
        }
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.insert(key, &normalized) {
                log::warn!("cache append failed: {e}");
            }
        }
        Ok(self.candidate(provider, normalized, text, source, start))
    }

    fn candidate(
        &self,
        provider: &ActiveProvider,
        text: String,
        source_text: &str,
        source: &LanguageTag,
        start: Instant,
    ) -> TranslationCandidate {
        let latency = start.elapsed();
        provider
            .counters
            .latency_micros
            .fetch_add(latency.as_micros() as u64, Ordering::Relaxed);
        TranslationCandidate {
            text,
            provider_id: provider.descriptor.id.clone(),
            source_text: source_text.to_string(),
            source_lang: source.clone(),
            latency,
        }
    }

    pub fn stats(&self) -> BTreeMap<String, ProviderStats> {
        self.providers
            .iter()
            .map(|p| {
                let c = &p.counters;
                let requests = c.requests.load(Ordering::Relaxed);
                let succeeded = requests.saturating_sub(c.failures.load(Ordering::Relaxed)).max(1);
                (
                    p.descriptor.id.clone(),
                    ProviderStats {
                        requests,
                        network_calls: c.network_calls.load(Ordering::Relaxed),
                        cache_hits: c.cache_hits.load(Ordering::Relaxed),
                        failures: c.failures.load(Ordering::Relaxed),
                        mean_latency_ms: c.latency_micros.load(Ordering::Relaxed) as f64 / 1000.0 / succeeded as f64,
                    },
                )
            })
            .collect()
    }

    pub fn total_network_calls(&self) -> u64 {
        self.providers
            .iter()
            .map(|p| p.counters.network_calls.load(Ordering::Relaxed))
            .sum()
    }
}
