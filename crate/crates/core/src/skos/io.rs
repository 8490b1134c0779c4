//! Turtle and RDF/XML reading and writing.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use oxrdf::{BlankNode, Graph, NamedOrBlankNode, Term as RdfTerm, Triple};
use oxrdfxml::{RdfXmlParseError, RdfXmlParser, RdfXmlSerializer};
use oxttl::{TurtleParser, TurtleSerializer, TurtleSyntaxError};

use super::vocab::PREFIXES;
use super::{SkosError, Thesaurus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdfFormat {
    Turtle,
    RdfXml,
    Auto,
}

impl RdfFormat {
    pub fn from_extension(path: &Path) -> Option<RdfFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "ttl" | "turtle" | "nt" => Some(RdfFormat::Turtle),
            "rdf" | "xml" | "owl" => Some(RdfFormat::RdfXml),
            _ => None,
        }
    }

    fn sniff(bytes: &[u8]) -> RdfFormat {
        let text = String::from_utf8_lossy(&bytes[..bytes.len().min(1024)]);
        let head = text.trim_start_matches('\u{feff}').trim_start();
        if head.starts_with("<?xml") || head.starts_with("<rdf:RDF") || head.starts_with("<!--") {
            RdfFormat::RdfXml
        } else {
            RdfFormat::Turtle
        }
    }
}

impl std::str::FromStr for RdfFormat {
    type Err = SkosError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "turtle" | "ttl" => Ok(RdfFormat::Turtle),
            "rdfxml" | "rdf/xml" | "xml" | "rdf" => Ok(RdfFormat::RdfXml),
            "auto" => Ok(RdfFormat::Auto),
            other => Err(SkosError::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn parse_thesaurus(path: impl AsRef<Path>, format: RdfFormat) -> Result<Thesaurus, SkosError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| SkosError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let format = match format {
        RdfFormat::Auto => match RdfFormat::from_extension(path) {
            Some(f) => f,
            None => match path.extension().and_then(|e| e.to_str()) {
                Some(ext @ ("jsonld" | "json" | "nq" | "trig" | "n3")) => {
                    return Err(SkosError::UnsupportedFormat(ext.to_string()))
                }
                _ => RdfFormat::sniff(&bytes),
            },
        },
        f => f,
    };
    let graph = parse_bytes(&bytes, format, &path.display().to_string())?;
    Ok(Thesaurus::from_graph(graph, path.display().to_string()))
}

/// Parses an in-memory document. Blank nodes are relabelled `b0`, `b1`, ...
/// in order of first appearance so repeated parses of the same input agree.
pub fn parse_bytes(bytes: &[u8], format: RdfFormat, origin: &str) -> Result<Graph, SkosError> {
    let mut relabel = BlankRelabel::default();
    let mut graph = Graph::new();
    match format {
        RdfFormat::Turtle | RdfFormat::Auto => {
            for triple in TurtleParser::new().for_slice(bytes) {
                let triple = triple.map_err(|e| turtle_error(e, origin))?;
                graph.insert(&relabel.apply(triple));
            }
        }
        RdfFormat::RdfXml => {
            let mut parser = RdfXmlParser::new().for_reader(bytes);
            while let Some(item) = parser.next() {
                match item {
                    Ok(triple) => {
                        graph.insert(&relabel.apply(triple));
                    }
                    Err(e) => {
                        let offset = parser.buffer_position() as usize;
                        return Err(rdfxml_error(e, bytes, offset, origin));
                    }
                }
            }
        }
    }
    Ok(graph)
}

#[derive(Default)]
struct BlankRelabel {
    ids: HashMap<String, BlankNode>,
}

impl BlankRelabel {
    fn node(&mut self, b: &BlankNode) -> BlankNode {
        let next = self.ids.len();
        self.ids
            .entry(b.as_str().to_string())
            .or_insert_with(|| BlankNode::new_unchecked(format!("b{next}")))
            .clone()
    }

    fn apply(&mut self, t: Triple) -> Triple {
        let subject = match t.subject {
            NamedOrBlankNode::BlankNode(b) => NamedOrBlankNode::BlankNode(self.node(&b)),
            s => s,
        };
        let object = match t.object {
            RdfTerm::BlankNode(b) => RdfTerm::BlankNode(self.node(&b)),
            o => o,
        };
        Triple::new(subject, t.predicate, object)
    }
}

fn turtle_error(e: TurtleSyntaxError, origin: &str) -> SkosError {
    let loc = e.location();
    SkosError::Parse {
        path: origin.to_string(),
        line: loc.start.line + 1,
        column: loc.start.column + 1,
        message: e.message().to_string(),
    }
}

fn rdfxml_error(e: RdfXmlParseError, bytes: &[u8], offset: usize, origin: &str) -> SkosError {
    match e {
        RdfXmlParseError::Syntax(s) => {
            let consumed = &bytes[..offset.min(bytes.len())];
            let line = consumed.iter().filter(|&&b| b == b'\n').count() as u64 + 1;
            let line_start = consumed.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let column = String::from_utf8_lossy(&consumed[line_start..]).chars().count() as u64 + 1;
            SkosError::Parse {
                path: origin.to_string(),
                line,
                column,
                message: s.to_string(),
            }
        }
        RdfXmlParseError::Io(source) => SkosError::Io {
            path: origin.to_string(),
            source,
        },
    }
}

/// Triples in a stable order (subject, predicate, object by their N-Triples
/// form) so serialization is byte-reproducible.
pub(crate) fn sorted_triples(graph: &Graph) -> Vec<Triple> {
    let mut triples: Vec<(String, Triple)> = graph
        .iter()
        .map(|t| {
            let owned = t.into_owned();
            (owned.to_string(), owned)
        })
        .collect();
    triples.sort_by(|a, b| a.0.cmp(&b.0));
    triples.into_iter().map(|(_, t)| t).collect()
}

pub fn serialize_to_vec(t: &Thesaurus, format: RdfFormat) -> Result<Vec<u8>, SkosError> {
    let triples = sorted_triples(t.graph());
    let io_err = |source| SkosError::Io {
        path: "<memory>".to_string(),
        source,
    };
    match format {
        RdfFormat::Turtle | RdfFormat::Auto => {
            let mut serializer = TurtleSerializer::new();
            for (prefix, iri) in PREFIXES {
                serializer = serializer
                    .with_prefix(*prefix, *iri)
                    .expect("static prefix IRIs are valid");
            }
            let mut writer = serializer.for_writer(Vec::new());
            for triple in &triples {
                writer.serialize_triple(triple).map_err(io_err)?;
            }
            writer.finish().map_err(io_err)
        }
        RdfFormat::RdfXml => {
            let mut serializer = RdfXmlSerializer::new();
            for (prefix, iri) in PREFIXES {
                serializer = serializer
                    .with_prefix(*prefix, *iri)
                    .expect("static prefix IRIs are valid");
            }
            let mut writer = serializer.for_writer(Vec::new());
            for triple in &triples {
                writer.serialize_triple(triple).map_err(io_err)?;
            }
            writer.finish().map_err(io_err)
        }
    }
}

pub fn serialize(t: &Thesaurus, path: impl AsRef<Path>, format: RdfFormat) -> Result<(), SkosError> {
    let path = path.as_ref();
    let format = match format {
        RdfFormat::Auto => RdfFormat::from_extension(path).unwrap_or(RdfFormat::Turtle),
        f => f,
    };
    let bytes = serialize_to_vec(t, format)?;
    let io_err = |source| SkosError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(&bytes).map_err(io_err)?;
    file.flush().map_err(io_err)
}
