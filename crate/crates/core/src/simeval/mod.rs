//! Back-translation evaluation: strip one language, translate it back, and
//! compare the result with the removed originals.

mod embedding;
mod strings;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};

pub use self::embedding::{
    cosine_sim, Embedding, EmbeddingError, EmbeddingModel, DEFAULT_DIM, DEFAULT_VOCAB_SIZE, WORD_START,
};
pub use self::strings::{exact_match, jaro_sim, jaro_winkler_sim, levenshtein, levenshtein_sim};
use crate::lang::LanguageTag;
use crate::skos::{LabelProperty, Thesaurus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Measure {
    Exact,
    Levenshtein,
    JaroWinkler,
    Cosine,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Exact,
        Measure::Levenshtein,
        Measure::JaroWinkler,
        Measure::Cosine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Exact => "exact",
            Measure::Levenshtein => "levenshtein",
            Measure::JaroWinkler => "jaro_winkler",
            Measure::Cosine => "cosine",
        }
    }

    /// Parses a comma-separated list such as `exact,levenshtein`.
    pub fn parse_list(s: &str) -> Result<Vec<Measure>, String> {
        let mut out: Vec<Measure> = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err("no measures selected".into());
        }
        Ok(out)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "exact" | "string" => Ok(Measure::Exact),
            "levenshtein" => Ok(Measure::Levenshtein),
            "jaro_winkler" | "jarowinkler" => Ok(Measure::JaroWinkler),
            "cosine" => Ok(Measure::Cosine),
            other => Err(format!(
                "unknown measure `{other}` (expected exact, levenshtein, jaro_winkler, cosine)"
            )),
        }
    }
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SimilarityScores {
    pub exact: f64,
    pub levenshtein: f64,
    pub jaro_winkler: f64,
    /// Clamped to [0, 1]; `None` when cosine was not computed.
    pub cosine: Option<f64>,
}

impl SimilarityScores {
    pub fn get(&self, m: Measure) -> Option<f64> {
        match m {
            Measure::Exact => Some(self.exact),
            Measure::Levenshtein => Some(self.levenshtein),
            Measure::JaroWinkler => Some(self.jaro_winkler),
            Measure::Cosine => self.cosine,
        }
    }

    fn max(self, o: Self) -> Self {
        Self {
            exact: self.exact.max(o.exact),
            levenshtein: self.levenshtein.max(o.levenshtein),
            jaro_winkler: self.jaro_winkler.max(o.jaro_winkler),
            cosine: match (self.cosine, o.cosine) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

/// Scores one pair. Cosine is computed only when `model` is given.
pub fn score_pair(
    translation: &str,
    original: &str,
    model: Option<&EmbeddingModel>,
) -> (SimilarityScores, Option<f64>) {
    let raw_cosine = model.map(|m| m.similarity(translation, original));
    let scores = SimilarityScores {
        exact: exact_match(translation, original),
        levenshtein: levenshtein_sim(translation, original),
        jaro_winkler: jaro_winkler_sim(translation, original),
        cosine: raw_cosine.map(|c| c.unwrap_or(0.0).clamp(0.0, 1.0)),
    };
    (scores, raw_cosine.flatten())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermScore {
    pub iri: String,
    pub originals: Vec<String>,
    pub translations: Vec<String>,
    pub scores: SimilarityScores,
    /// Unclamped cosine of the best-scoring pair.
    pub cosine_raw: Option<f64>,
    /// An embedding was zero, so cosine was taken as 0.
    pub zero_vector: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalTiming {
    pub translate_ms: f64,
    pub score_ms: f64,
    pub score_ms_per_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub lang: String,
    pub property: String,
    pub measures: Vec<Measure>,
    pub term_count: usize,
    pub untranslated: usize,
    pub zero_vectors: usize,
    /// Mean over all terms, untranslated ones counting as 0.
    pub macro_average: BTreeMap<String, f64>,
    pub terms: Vec<TermScore>,
    pub timing: EvalTiming,
}

impl SimilarityReport {
    pub fn macro_of(&self, m: Measure) -> Option<f64> {
        self.macro_average.get(m.as_str()).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One header row and one data row with the aggregates.
    pub fn write_csv(&self, out: impl Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "lang".to_string(),
            "property".into(),
            "terms".into(),
            "untranslated".into(),
        ];
        header.extend(self.measures.iter().map(|m| m.as_str().to_string()));
        w.write_record(&header)?;
        let mut row = vec![
            self.lang.clone(),
            self.property.clone(),
            self.term_count.to_string(),
            self.untranslated.to_string(),
        ];
        row.extend(
            self.measures
                .iter()
                .map(|m| format!("{:.6}", self.macro_of(*m).unwrap_or(0.0))),
        );
        w.write_record(&row)?;
        w.flush()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("language `{0}` does not occur on the evaluated property")]
    LanguageAbsent(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Strips `lang` from `original`, lets `translate` restore it, and scores
/// each concept's back-translations against its removed labels. With
/// several originals or translations the best pair counts, per measure.
pub fn evaluate_backtranslation<F>(
    original: &Thesaurus,
    lang: &LanguageTag,
    prop: &LabelProperty,
    measures: &[Measure],
    model: Option<&EmbeddingModel>,
    translate: F,
) -> Result<SimilarityReport, EvalError>
where
    F: FnOnce(&Thesaurus) -> Thesaurus,
{
    let wants_cosine = measures.contains(&Measure::Cosine);
    if wants_cosine && model.is_none() {
        return Err(EmbeddingError::ModelMissing(lang.to_string()).into());
    }
    let model = model.filter(|_| wants_cosine);
    let (stripped, removed) = original.strip_language(lang, prop);
    if removed.is_empty() {
        return Err(EvalError::LanguageAbsent(lang.to_string()));
    }

    let start = Instant::now();
    let restored = translate(&stripped);
    let translate_time = start.elapsed();

    let start = Instant::now();
    let back: BTreeMap<_, Vec<String>> = restored
        .extract_terms(prop)
        .into_iter()
        .map(|t| {
            let texts = t
                .labels
                .iter()
                .filter(|(l, _)| l.same_language(lang))
                .flat_map(|(_, v)| v.iter().cloned())
                .collect();
            (t.id, texts)
        })
        .collect();

    let mut terms = Vec::with_capacity(removed.len());
    for (id, originals) in &removed {
        let translations = back.get(id).cloned().unwrap_or_default();
        let zero = SimilarityScores {
            cosine: model.map(|_| 0.0),
            ..SimilarityScores::default()
        };
        let mut best = zero;
        let mut cosine_raw: Option<f64> = None;
        let mut zero_vector = false;
        for t in &translations {
            for o in originals {
                let (s, raw) = score_pair(t, &o.text, model);
                best = best.max(s);
                match raw {
                    Some(r) => cosine_raw = Some(cosine_raw.map_or(r, |c| c.max(r))),
                    None if model.is_some() => zero_vector = true,
                    None => {}
                }
            }
        }
        terms.push(TermScore {
            iri: id.to_string(),
            originals: originals.iter().map(|o| o.text.clone()).collect(),
            translations,
            scores: best,
            cosine_raw,
            zero_vector: zero_vector && cosine_raw.is_none(),
        });
    }
    let score_time = start.elapsed();

    let n = terms.len();
    let macro_average = measures
        .iter()
        .map(|m| {
            let sum: f64 = terms.iter().map(|t| t.scores.get(*m).unwrap_or(0.0)).sum();
            (m.as_str().to_string(), sum / n as f64)
        })
        .collect();
    let ms = |d: Duration| d.as_secs_f64() * 1000.0;
    Ok(SimilarityReport {
        lang: lang.to_string(),
        property: prop.to_string(),
        measures: measures.to_vec(),
        term_count: n,
        untranslated: terms.iter().filter(|t| t.translations.is_empty()).count(),
        zero_vectors: terms.iter().filter(|t| t.zero_vector).count(),
        macro_average,
        timing: EvalTiming {
            translate_ms: ms(translate_time),
            score_ms: ms(score_time),
            score_ms_per_term: ms(score_time) / n as f64,
        },
        terms,
    })
}
