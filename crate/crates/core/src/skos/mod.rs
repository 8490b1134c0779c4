//! SKOS thesaurus model: parsing, term extraction and label mutation.

mod io;
pub mod vocab;

use std::collections::BTreeMap;
use std::fmt;

use oxrdf::{BlankNode, Graph, Literal, NamedNode, NamedOrBlankNode, Triple};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::io::{parse_bytes, parse_thesaurus, serialize, serialize_to_vec, RdfFormat};
use crate::lang::LanguageTag;

/// Editorial note attached to machine-generated labels when requested.
pub const GENERATED_NOTE: &str = "machine-translated by WOKIE-style pipeline";

#[derive(Debug, Error)]
pub enum SkosError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: u64,
        column: u64,
        message: String,
    },
    #[error("unsupported RDF format `{0}` (expected turtle or rdfxml)")]
    UnsupportedFormat(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("label text is empty")]
    EmptyLabel,
    #[error("invalid IRI `{0}`")]
    InvalidIri(String),
    #[error("invalid language tag `{0}`")]
    InvalidLanguage(String),
}

/// Identifier of a concept node: an IRI or a stable blank-node label
/// (`_:b0`, assigned at parse time).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn from_node(node: &NamedOrBlankNode) -> Self {
        match node {
            NamedOrBlankNode::NamedNode(n) => Self(n.as_str().to_string()),
            NamedOrBlankNode::BlankNode(b) => Self(format!("_:{}", b.as_str())),
        }
    }

    fn to_node(&self) -> Result<NamedOrBlankNode, SkosError> {
        match self.0.strip_prefix("_:") {
            Some(label) => BlankNode::new(label)
                .map(Into::into)
                .map_err(|_| SkosError::InvalidIri(self.0.clone())),
            None => NamedNode::new(&self.0)
                .map(Into::into)
                .map_err(|_| SkosError::InvalidIri(self.0.clone())),
        }
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The property whose literals are read and written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelProperty(NamedNode);

impl LabelProperty {
    pub fn pref_label() -> Self {
        Self(NamedNode::new_unchecked(vocab::PREF_LABEL))
    }

    pub fn alt_label() -> Self {
        Self(NamedNode::new_unchecked(vocab::ALT_LABEL))
    }

    pub fn definition() -> Self {
        Self(NamedNode::new_unchecked(vocab::DEFINITION))
    }

    /// Accepts `prefLabel`, `altLabel`, `definition`, a `skos:` CURIE or an
    /// absolute IRI.
    pub fn parse(raw: &str) -> Result<Self, SkosError> {
        let local = raw.strip_prefix("skos:").unwrap_or(raw);
        match local {
            "prefLabel" => Ok(Self::pref_label()),
            "altLabel" => Ok(Self::alt_label()),
            "definition" => Ok(Self::definition()),
            _ => NamedNode::new(raw)
                .map(Self)
                .map_err(|_| SkosError::InvalidIri(raw.to_string())),
        }
    }

    pub fn iri(&self) -> &str {
        self.0.as_str()
    }

    pub fn is_pref_label(&self) -> bool {
        self.0.as_str() == vocab::PREF_LABEL
    }

    fn node(&self) -> &NamedNode {
        &self.0
    }
}

impl Default for LabelProperty {
    fn default() -> Self {
        Self::pref_label()
    }
}

impl fmt::Display for LabelProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_str().strip_prefix(vocab::SKOS) {
            Some(local) => write!(f, "skos:{local}"),
            None => f.write_str(self.0.as_str()),
        }
    }
}

/// A language-tagged label value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaggedText {
    pub text: String,
    pub lang: LanguageTag,
}

/// One concept seen through a single label property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub id: ConceptId,
    pub labels: BTreeMap<LanguageTag, Vec<String>>,
    pub definitions: BTreeMap<LanguageTag, String>,
    pub broader: Vec<ConceptId>,
}

impl Term {
    pub fn has_language(&self, lang: &LanguageTag) -> bool {
        self.labels.keys().any(|l| l.same_language(lang))
    }

    /// Definition preferring `preferred` languages in order, then any.
    pub fn definition_for(&self, preferred: &[&LanguageTag]) -> Option<&str> {
        preferred
            .iter()
            .find_map(|p| {
                self.definitions
                    .iter()
                    .find(|(l, _)| l.same_language(p))
                    .map(|(_, d)| d.as_str())
            })
            .or_else(|| self.definitions.values().next().map(String::as_str))
    }
}

#[derive(Debug, Clone)]
pub struct Thesaurus {
    graph: Graph,
    pub scheme_description: Option<String>,
    pub source_path: String,
}

impl Thesaurus {
    pub fn from_graph(graph: Graph, source_path: impl Into<String>) -> Self {
        let scheme_description = scheme_description(&graph);
        Self {
            graph,
            scheme_description,
            source_path: source_path.into(),
        }
    }

    pub fn empty() -> Self {
        Self::from_graph(Graph::new(), "<empty>")
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn triple_count(&self) -> usize {
        self.graph.len()
    }

    pub fn contains_concept(&self, id: &ConceptId) -> bool {
        id.to_node()
            .is_ok_and(|node| self.graph.triples_for_subject(&node).next().is_some())
    }

    /// Graph equality up to blank-node relabelling.
    pub fn isomorphic(&self, other: &Thesaurus) -> bool {
        let mut a = self.graph.clone();
        let mut b = other.graph.clone();
        a.canonicalize(oxrdf::dataset::CanonicalizationAlgorithm::Unstable);
        b.canonicalize(oxrdf::dataset::CanonicalizationAlgorithm::Unstable);
        a == b
    }

    /// True if every triple of `other` is present here (blank-node labels
    /// compared verbatim).
    pub fn contains_all(&self, other: &Thesaurus) -> bool {
        other.graph.iter().all(|t| self.graph.contains(t))
    }

    pub fn extract_terms(&self, prop: &LabelProperty) -> Vec<Term> {
        let definition = NamedNode::new_unchecked(vocab::DEFINITION);
        let broader = NamedNode::new_unchecked(vocab::BROADER);
        let mut by_subject: BTreeMap<ConceptId, (NamedOrBlankNode, BTreeMap<LanguageTag, Vec<String>>)> =
            BTreeMap::new();
        for triple in self.graph.triples_for_predicate(prop.node()) {
            let oxrdf::TermRef::Literal(lit) = triple.object else {
                continue;
            };
            let Some((text, lang)) = literal_parts(lit.value(), lit.language()) else {
                continue;
            };
            let subject = triple.subject.into_owned();
            let entry = by_subject
                .entry(ConceptId::from_node(&subject))
                .or_insert_with(|| (subject, BTreeMap::new()));
            entry.1.entry(lang).or_default().push(text);
        }

        by_subject
            .into_iter()
            .map(|(id, (node, mut labels))| {
                for values in labels.values_mut() {
                    values.sort();
                    values.dedup();
                }
                let mut definitions = BTreeMap::new();
                for obj in self.graph.objects_for_subject_predicate(&node, &definition) {
                    if let oxrdf::TermRef::Literal(lit) = obj {
                        if let Some((text, lang)) = literal_parts(lit.value(), lit.language()) {
                            definitions
                                .entry(lang)
                                .and_modify(|d: &mut String| {
                                    if text < *d {
                                        *d = text.clone()
                                    }
                                })
                                .or_insert(text);
                        }
                    }
                }
                let mut parents: Vec<ConceptId> = self
                    .graph
                    .objects_for_subject_predicate(&node, &broader)
                    .filter_map(|o| match o {
                        oxrdf::TermRef::NamedNode(n) => Some(ConceptId(n.as_str().to_string())),
                        oxrdf::TermRef::BlankNode(b) => Some(ConceptId(format!("_:{}", b.as_str()))),
                        _ => None,
                    })
                    .collect();
                parents.sort();
                Term {
                    id,
                    labels,
                    definitions,
                    broader: parents,
                }
            })
            .collect()
    }

    /// Adds `text@lang` as a value of `prop`. Returns whether the triple was new.
    pub fn add_translation(
        &mut self,
        id: &ConceptId,
        prop: &LabelProperty,
        text: &str,
        lang: &LanguageTag,
    ) -> Result<bool, SkosError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(SkosError::EmptyLabel);
        }
        if !self.contains_concept(id) {
            return Err(SkosError::UnknownConcept(id.clone()));
        }
        let literal = Literal::new_language_tagged_literal(text, lang.as_str())
            .map_err(|_| SkosError::InvalidLanguage(lang.to_string()))?;
        let triple = Triple::new(id.to_node()?, prop.node().clone(), literal);
        Ok(self.graph.insert(&triple))
    }

    pub fn mark_generated(&mut self, id: &ConceptId) -> Result<bool, SkosError> {
        if !self.contains_concept(id) {
            return Err(SkosError::UnknownConcept(id.clone()));
        }
        let triple = Triple::new(
            id.to_node()?,
            NamedNode::new_unchecked(vocab::EDITORIAL_NOTE),
            Literal::new_simple_literal(GENERATED_NOTE),
        );
        Ok(self.graph.insert(&triple))
    }

    /// Removes every `prop` literal whose primary language subtag matches
    /// `lang`, returning the removed values per concept.
    pub fn strip_language(
        &self,
        lang: &LanguageTag,
        prop: &LabelProperty,
    ) -> (Thesaurus, BTreeMap<ConceptId, Vec<TaggedText>>) {
        let mut stripped = self.clone();
        let mut removed: BTreeMap<ConceptId, Vec<TaggedText>> = BTreeMap::new();
        let doomed: Vec<Triple> = self
            .graph
            .triples_for_predicate(prop.node())
            .filter_map(|t| {
                let oxrdf::TermRef::Literal(lit) = t.object else {
                    return None;
                };
                let tag = LanguageTag::parse(lit.language()?).ok()?;
                if !tag.same_language(lang) {
                    return None;
                }
                removed
                    .entry(ConceptId::from_node(&t.subject.into_owned()))
                    .or_default()
                    .push(TaggedText {
                        text: lit.value().to_string(),
                        lang: tag,
                    });
                Some(t.into_owned())
            })
            .collect();
        for t in &doomed {
            stripped.graph.remove(t);
        }
        for values in removed.values_mut() {
            values.sort();
        }
        (stripped, removed)
    }
}

fn literal_parts(value: &str, language: Option<&str>) -> Option<(String, LanguageTag)> {
    let text = value.trim();
    if text.is_empty() {
        return None;
    }
    let lang = match language {
        Some(tag) => match LanguageTag::parse(tag) {
            Ok(t) => t,
            Err(_) => {
                log::warn!("skipping literal with malformed language tag `{tag}`");
                return None;
            }
        },
        None => LanguageTag::undetermined(),
    };
    Some((text.to_string(), lang))
}

fn scheme_description(graph: &Graph) -> Option<String> {
    let rdf_type = NamedNode::new_unchecked(vocab::RDF_TYPE);
    let scheme = NamedNode::new_unchecked(vocab::CONCEPT_SCHEME);
    let mut schemes: Vec<NamedOrBlankNode> = graph
        .subjects_for_predicate_object(&rdf_type, &scheme)
        .map(|s| s.into_owned())
        .collect();
    schemes.sort_by_key(|s| s.to_string());
    for prop in vocab::SCHEME_DESCRIPTION_PROPERTIES {
        let prop = NamedNode::new_unchecked(*prop);
        for s in &schemes {
            let mut values: Vec<(bool, String)> = graph
                .objects_for_subject_predicate(s, &prop)
                .filter_map(|o| match o {
                    oxrdf::TermRef::Literal(l) if !l.value().trim().is_empty() => {
                        let english = l.language().is_some_and(|t| t.starts_with("en"));
                        Some((!english, l.value().trim().to_string()))
                    }
                    _ => None,
                })
                .collect();
            values.sort();
            if let Some((_, v)) = values.into_iter().next() {
                return Some(v);
            }
        }
    }
    None
}
