use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::time::Duration;

use serde::Serialize;

use super::{Pipeline, TermOutcome, TermRoute};
use crate::llm::{LlmUsage, Prompt};
use crate::provider::ProviderStats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncoveredLabel {
    pub iri: String,
    pub text: String,
    pub lang: String,
}

/// Micro-averaged milliseconds: total stage time over the terms that ran it.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LatencySummary {
    pub gather_ms: f64,
    pub consensus_ms: f64,
    pub refine_ms: f64,
    pub per_translation_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub target_lang: String,
    pub property: String,
    pub threshold: f64,
    pub min_translations: usize,
    pub provider_order: Vec<String>,
    pub terms: usize,
    pub translated: usize,
    pub literals_written: usize,
    pub routes: BTreeMap<String, usize>,
    pub provider_requests: u64,
    pub provider_network_calls: u64,
    pub cache_hits: u64,
    pub providers: BTreeMap<String, ProviderStats>,
    pub llm_calls: u64,
    pub llm_requests: u64,
    pub llm_usage: Option<LlmUsage>,
    pub latency: LatencySummary,
    pub uncovered_labels: Vec<UncoveredLabel>,
    pub warnings: Vec<String>,
    pub wall_time_ms: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

fn mean_ms(durations: impl Iterator<Item = Duration>) -> f64 {
    let (sum, n) = durations.fold((Duration::ZERO, 0u32), |(s, n), d| (s + d, n + 1));
    if n == 0 {
        0.0
    } else {
        ms(sum) / f64::from(n)
    }
}

impl RunReport {
    pub(super) fn build(p: &Pipeline, outcomes: &[TermOutcome], written: usize, wall: Duration) -> Self {
        let cfg = p.config();
        let mut routes: BTreeMap<String, usize> = TermRoute::ALL.iter().map(|r| (r.as_str().to_string(), 0)).collect();
        for o in outcomes {
            *routes.get_mut(o.route.as_str()).expect("all routes present") += 1;
        }
        let providers = p.hub().stats();
        let worked = || {
            outcomes
                .iter()
                .filter(|o| !matches!(o.route, TermRoute::SkippedExisting))
        };
        let translated: Vec<&TermOutcome> = outcomes.iter().filter(|o| o.final_text.is_some()).collect();
        let refined = || outcomes.iter().filter_map(|o| o.refinement.as_ref().map(|_| o));
        Self {
            target_lang: cfg.target_lang.to_string(),
            property: cfg.prop.to_string(),
            threshold: cfg.threshold,
            min_translations: cfg.min_translations,
            provider_order: p.hub().descriptors().map(|d| d.id.clone()).collect(),
            terms: outcomes.len(),
            translated: translated.len(),
            literals_written: written,
            routes,
            provider_requests: providers.values().map(|s| s.requests).sum(),
            provider_network_calls: p.hub().total_network_calls(),
            cache_hits: providers.values().map(|s| s.cache_hits).sum(),
            providers,
            llm_calls: outcomes.iter().map(|o| u64::from(o.llm_calls())).sum(),
            llm_requests: refined()
                .map(|o| u64::from(o.refinement.as_ref().map_or(0, |r| r.llm_requests)))
                .sum(),
            llm_usage: p.llm().map(|l| l.usage()),
            latency: LatencySummary {
                gather_ms: mean_ms(worked().map(|o| o.timings.gather)),
                consensus_ms: mean_ms(worked().filter(|o| o.confidence.is_some()).map(|o| o.timings.consensus)),
                refine_ms: mean_ms(refined().map(|o| o.timings.refine)),
                per_translation_ms: mean_ms(translated.iter().map(|o| o.timings.total())),
            },
            uncovered_labels: outcomes
                .iter()
                .flat_map(|o| {
                    o.uncovered.iter().map(|l| UncoveredLabel {
                        iri: o.iri.to_string(),
                        text: l.text.clone(),
                        lang: l.lang.to_string(),
                    })
                })
                .collect(),
            warnings: p.warnings().to_vec(),
            wall_time_ms: ms(wall),
        }
    }

    /// True when there was work to do and none of it produced a translation.
    pub fn all_untranslated(&self) -> bool {
        let skipped = self
            .routes
            .get(TermRoute::SkippedExisting.as_str())
            .copied()
            .unwrap_or(0);
        self.terms > skipped && self.translated == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "target {} ({})  threshold {}  min {}  providers {}",
            self.target_lang,
            self.property,
            self.threshold,
            self.min_translations,
            self.provider_order.join(",")
        );
        let _ = writeln!(s, "{:<26}{:>8}", "route", "terms");
        for (route, n) in &self.routes {
            let _ = writeln!(s, "{route:<26}{n:>8}");
        }
        let _ = writeln!(s, "{:<26}{:>8}", "total", self.terms);
        let _ = writeln!(
            s,
            "{:<12}{:>10}{:>10}{:>8}{:>10}{:>12}",
            "provider", "requests", "network", "cached", "failures", "mean ms"
        );
        for id in &self.provider_order {
            if let Some(p) = self.providers.get(id) {
                let _ = writeln!(
                    s,
                    "{id:<12}{:>10}{:>10}{:>8}{:>10}{:>12.2}",
                    p.requests, p.network_calls, p.cache_hits, p.failures, p.mean_latency_ms
                );
            }
        }
        let _ = writeln!(
            s,
            "llm calls {}  llm requests {}  literals written {}  uncovered labels {}",
            self.llm_calls,
            self.llm_requests,
            self.literals_written,
            self.uncovered_labels.len()
        );
        let _ = writeln!(
            s,
            "ms per translation {:.2} (gather {:.2}, consensus {:.3}, refine {:.2})  wall {:.0} ms",
            self.latency.per_translation_ms,
            self.latency.gather_ms,
            self.latency.consensus_ms,
            self.latency.refine_ms,
            self.wall_time_ms
        );
        s
    }
}

/// One line of the refinement audit log.
#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord<'a> {
    pub iri: &'a str,
    pub route: TermRoute,
    pub final_text: Option<&'a str>,
    pub prompts: &'a [Prompt],
    pub raw_responses: &'a [String],
    pub errors: &'a [String],
}

/// Writes one JSON line per term that went through refinement.
pub fn write_audit_log(outcomes: &[TermOutcome], mut out: impl Write) -> io::Result<usize> {
    let mut n = 0;
    for o in outcomes {
        let Some(r) = &o.refinement else { continue };
        let record = AuditRecord {
            iri: o.iri.as_str(),
            route: o.route,
            final_text: o.final_text.as_deref(),
            prompts: &r.prompts,
            raw_responses: &r.raw_responses,
            errors: &r.errors,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
        n += 1;
    }
    Ok(n)
}
