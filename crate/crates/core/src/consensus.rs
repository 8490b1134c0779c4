//! Frequency-based agreement between translation candidates.
//!
//! Candidates are grouped by exact equality of their NFC-normalized, trimmed
//! text (case and diacritics significant). The largest group wins; ties go to
//! the group holding the best-ranked provider, then to the lexicographically
//! smallest text. The winning surface form is that of the best-ranked member.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::{Priority, TranslationCandidate};
use crate::text::canonical;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConsensusError {
    #[error("no translation candidates")]
    EmptyCandidates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusRoute {
    AcceptedByFrequency,
    NeedsRefinement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusResult {
    pub best: String,
    /// Provider of the reported surface form.
    pub provider_id: String,
    pub confidence: f64,
    pub group_size: usize,
    pub total: usize,
    pub route: ConsensusRoute,
}

struct Group<'a> {
    key: String,
    size: usize,
    /// (rank, surface text, provider) of the best-ranked member.
    lead: (usize, &'a str, &'a str),
}

fn winner<'a>(candidates: &'a [TranslationCandidate], priority: &Priority) -> Result<Group<'a>, ConsensusError> {
    if candidates.is_empty() {
        return Err(ConsensusError::EmptyCandidates);
    }
    let mut groups: BTreeMap<String, Group<'a>> = BTreeMap::new();
    for c in candidates {
        let key = canonical(&c.text);
        let member = (priority.rank(&c.provider_id), c.text.as_str(), c.provider_id.as_str());
        groups
            .entry(key.clone())
            .and_modify(|g| {
                g.size += 1;
                if member < g.lead {
                    g.lead = member;
                }
            })
            .or_insert(Group {
                key,
                size: 1,
                lead: member,
            });
    }
    let best = groups
        .into_values()
        .min_by(|a, b| {
            b.size
                .cmp(&a.size)
                .then(a.lead.0.cmp(&b.lead.0))
                .then_with(|| a.key.cmp(&b.key))
        })
        .expect("non-empty");
    Ok(best)
}

/// Scores candidates and decides whether the winner is accepted directly.
pub fn score(
    candidates: &[TranslationCandidate],
    threshold: f64,
    priority: &Priority,
) -> Result<ConsensusResult, ConsensusError> {
    let best = winner(candidates, priority)?;
    let total = candidates.len();
    let confidence = best.size as f64 / total as f64;
    Ok(ConsensusResult {
        best: best.lead.1.to_string(),
        provider_id: best.lead.2.to_string(),
        confidence,
        group_size: best.size,
        total,
        route: if confidence >= threshold {
            ConsensusRoute::AcceptedByFrequency
        } else {
            ConsensusRoute::NeedsRefinement
        },
    })
}

/// The most frequent candidate regardless of threshold.
pub fn fallback_pick(candidates: &[TranslationCandidate], priority: &Priority) -> Result<String, ConsensusError> {
    winner(candidates, priority).map(|g| g.lead.1.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cands(items: &[(&str, &str)]) -> Vec<TranslationCandidate> {
        items.iter().map(|(t, p)| TranslationCandidate::new(*t, *p)).collect()
    }

    fn prio(ids: &[&str]) -> Priority {
        Priority::from_order(ids)
    }

    #[test]
    fn three_of_five_meets_point_six() {
        let c = cands(&[
            ("Analyse", "a"),
            ("Analysieren", "b"),
            ("Analyse", "c"),
            ("Auswertung", "d"),
            ("Analyse", "e"),
        ]);
        let r = score(&c, 0.6, &prio(&["a", "b", "c", "d", "e"])).unwrap();
        assert_eq!(r.best, "Analyse");
        assert_eq!(r.confidence, 0.6);
        assert_eq!((r.group_size, r.total), (3, 5));
        assert_eq!(r.route, ConsensusRoute::AcceptedByFrequency);
    }

    #[test]
    fn singleton_is_accepted() {
        let r = score(&cands(&[("Analyse", "a")]), 0.6, &prio(&["a"])).unwrap();
        assert_eq!(r.confidence, 1.0);
        assert_eq!(r.route, ConsensusRoute::AcceptedByFrequency);
    }

    #[test]
    fn all_distinct_needs_refinement() {
        let c = cands(&[
            ("Randnotiz", "p1"),
            ("Marginalglosse", "p2"),
            ("Glosse", "p3"),
            ("Marginalie", "p4"),
        ]);
        let p = prio(&["p1", "p2", "p3", "p4"]);
        let r = score(&c, 0.6, &p).unwrap();
        assert_eq!(r.confidence, 0.25);
        assert_eq!(r.route, ConsensusRoute::NeedsRefinement);
        // tie broken by provider rank
        assert_eq!(r.best, "Randnotiz");
        assert_eq!(fallback_pick(&c, &p).unwrap(), "Randnotiz");
        let reversed = prio(&["p4", "p3", "p2", "p1"]);
        assert_eq!(fallback_pick(&c, &reversed).unwrap(), "Marginalie");
    }

    #[test]
    fn lexicographic_tie_break_when_ranks_equal() {
        let c = cands(&[("Zeta", "x"), ("Alpha", "x")]);
        assert_eq!(fallback_pick(&c, &prio(&["x"])).unwrap(), "Alpha");
        // unknown providers rank last but still tie-break by text
        assert_eq!(fallback_pick(&c, &prio(&[])).unwrap(), "Alpha");
    }

    #[test]
    fn majority_wins_fallback() {
        let c = cands(&[("Glosse", "a"), ("Randnotiz", "b"), ("Randnotiz", "c")]);
        assert_eq!(fallback_pick(&c, &prio(&["a", "b", "c"])).unwrap(), "Randnotiz");
    }

    #[test]
    fn grouping_is_case_sensitive_but_nfc_insensitive() {
        let c = cands(&[("analyse", "a"), ("Analyse", "b"), ("Analyse ", "c")]);
        let r = score(&c, 0.6, &prio(&["a", "b", "c"])).unwrap();
        assert_eq!((r.best.as_str(), r.group_size), ("Analyse", 2));

        let c = cands(&[("Ver\u{00F6}ffentlichung", "b"), ("Vero\u{0308}ffentlichung", "a")]);
        let r = score(&c, 1.0, &prio(&["a", "b"])).unwrap();
        assert_eq!(r.group_size, 2);
        // surface form of the best-ranked member, verbatim
        assert_eq!(r.best, "Vero\u{0308}ffentlichung");
        assert_eq!(r.provider_id, "a");
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(
            score(&[], 0.6, &prio(&[])).unwrap_err(),
            ConsensusError::EmptyCandidates
        );
        assert_eq!(
            fallback_pick(&[], &prio(&[])).unwrap_err(),
            ConsensusError::EmptyCandidates
        );
    }
}
