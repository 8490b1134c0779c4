use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use skosmt_core::provider::http::{HttpProviderConfig, HttpTranslator, Service};
use skosmt_core::provider::mock::{DictionaryProvider, EchoProvider};
use skosmt_core::provider::{ProviderDescriptor, ProviderRegistry};

use crate::config::{FileConfig, ProviderSection};
use crate::CliError;

pub const MOCK_DICT: &str = "mock_dict";
pub const MOCK_ECHO: &str = "mock_echo";

fn secs(value: f64, what: &str) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(value)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| CliError::Config(format!("{what} must be a positive number of seconds, got {value}")))
}

fn rate_limit(id: &str, section: &ProviderSection, default: Option<f64>) -> Result<Option<f64>, CliError> {
    match section.rate_limit {
        Some(r) if !(r > 0.0 && r.is_finite()) => Err(CliError::Config(format!(
            "provider.{id}.rate_limit must be positive, got {r}"
        ))),
        Some(r) => Ok(Some(r)),
        None => Ok(default),
    }
}

/// The eight HTTP services, `mock_echo`, and `mock_dict` when a dictionary
/// is configured.
pub fn build_registry(file: &FileConfig, dictionary: Option<&Path>) -> Result<ProviderRegistry, CliError> {
    let known: Vec<&str> = Service::ALL
        .iter()
        .map(|s| s.id())
        .chain([MOCK_DICT, MOCK_ECHO])
        .collect();
    if let Some(unknown) = file.provider.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(CliError::Config(format!(
            "unknown provider section [provider.{unknown}] (known: {})",
            known.join(", ")
        )));
    }
    let empty = ProviderSection::default();
    let section = |id: &str| file.provider.get(id).unwrap_or(&empty);

    let mut registry = ProviderRegistry::new();
    let register = |r: &mut ProviderRegistry, d, t| r.register(d, t).map_err(|e| CliError::Config(e.to_string()));
    for service in Service::ALL {
        let s = section(service.id());
        let config = HttpProviderConfig {
            endpoint: s.endpoint.clone(),
            region: s.region.clone(),
            timeout: s
                .timeout_secs
                .map(|t| secs(t, &format!("provider.{}.timeout_secs", service.id())))
                .transpose()?,
            ..HttpProviderConfig::from_env(service)
        };
        let translator = HttpTranslator::new(service, config).map_err(|e| CliError::Config(e.to_string()))?;
        let d = service.descriptor();
        let limit = rate_limit(service.id(), s, d.rate_limit)?;
        register(&mut registry, d.with_rate_limit(limit), Arc::new(translator))?;
    }

    let dict_section = section(MOCK_DICT);
    if let Some(path) = dictionary.or(dict_section.dictionary.as_deref()) {
        let dict = DictionaryProvider::load(path)
            .map_err(|e| CliError::Config(format!("cannot read dictionary {}: {e}", path.display())))?;
        let d = ProviderDescriptor::new(MOCK_DICT).with_rate_limit(rate_limit(MOCK_DICT, dict_section, None)?);
        register(&mut registry, d, Arc::new(dict))?;
    }
    let d = ProviderDescriptor::new(MOCK_ECHO).with_rate_limit(rate_limit(MOCK_ECHO, section(MOCK_ECHO), None)?);
    register(&mut registry, d, Arc::new(EchoProvider))?;
    Ok(registry)
}
