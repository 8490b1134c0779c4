//! Subword embeddings in the BPEmb layout: a SentencePiece BPE vocabulary
//! (`*.vocab`, `piece<TAB>score` per line) and word2vec vectors (`*.w2v.bin`
//! or `*.w2v.txt`). Fetch them with `scripts/fetch_bpemb.sh`.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::lang::LanguageTag;

/// Word-boundary marker prepended to every word before segmentation.
pub const WORD_START: char = '\u{2581}';
/// Smallest published per-language model.
pub const DEFAULT_VOCAB_SIZE: usize = 1000;
pub const DEFAULT_DIM: usize = 25;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("no embedding model for language `{0}`")]
    ModelMissing(String),
}

#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    lang: LanguageTag,
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
    /// Merge priority: higher merges first.
    scores: HashMap<String, f32>,
}

/// An embedding, or `None` when no piece of the input had a vector.
pub type Embedding = Option<Vec<f32>>;

impl EmbeddingModel {
    /// Builds a model from pieces with merge scores and their vectors.
    /// Pieces without a score get one from their position in `vectors`.
    pub fn from_parts(
        lang: LanguageTag,
        vectors: Vec<(String, Vec<f32>)>,
        scores: HashMap<String, f32>,
    ) -> Result<Self, String> {
        let dim = vectors.first().map_or(0, |(_, v)| v.len());
        let mut scores = scores;
        let mut table = HashMap::with_capacity(vectors.len());
        for (rank, (piece, v)) in vectors.into_iter().enumerate() {
            if v.len() != dim {
                return Err(format!("piece `{piece}` has dimension {}, expected {dim}", v.len()));
            }
            scores.entry(piece.clone()).or_insert(-(rank as f32));
            if table.insert(piece.clone(), v).is_some() {
                return Err(format!("duplicate piece `{piece}`"));
            }
        }
        Ok(Self {
            lang,
            dim,
            vectors: table,
            scores,
        })
    }

    /// Loads word2vec vectors (binary when the file name contains `.bin`,
    /// text otherwise) and an optional SentencePiece vocabulary.
    pub fn load(lang: LanguageTag, vectors: &Path, vocab: Option<&Path>) -> Result<Self, EmbeddingError> {
        let table = read_word2vec(vectors)?;
        let scores = match vocab {
            Some(p) => read_vocab(p)?,
            None => HashMap::new(),
        };
        Self::from_parts(lang, table, scores).map_err(|message| EmbeddingError::Format {
            path: vectors.to_path_buf(),
            message,
        })
    }

    /// Looks for `<lang>.wiki.bpe.vs<N>.d<D>.w2v.{bin,txt}` and the matching
    /// `.vocab` in `dir`.
    pub fn load_from_dir(dir: &Path, lang: &LanguageTag, vs: usize, dim: usize) -> Result<Self, EmbeddingError> {
        let stem = format!("{}.wiki.bpe.vs{vs}", lang.primary());
        let vectors = ["bin", "txt"]
            .iter()
            .map(|ext| dir.join(format!("{stem}.d{dim}.w2v.{ext}")))
            .find(|p| p.exists())
            .ok_or_else(|| EmbeddingError::ModelMissing(lang.to_string()))?;
        let vocab = dir.join(format!("{stem}.vocab"));
        Self::load(lang.clone(), &vectors, vocab.exists().then_some(vocab.as_path()))
    }

    pub fn lang(&self) -> &LanguageTag {
        &self.lang
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Lowercases, maps digits to `0` and segments each word by greedy
    /// highest-score pair merging.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let prepared: String = text
            .to_lowercase()
            .chars()
            .map(|c| if c.is_numeric() { '0' } else { c })
            .collect();
        prepared
            .split_whitespace()
            .flat_map(|w| self.segment(&format!("{WORD_START}{w}")))
            .collect()
    }

    fn segment(&self, word: &str) -> Vec<String> {
        let mut symbols: Vec<String> = word.chars().map(String::from).collect();
        loop {
            let best = symbols
                .windows(2)
                .enumerate()
                .filter_map(|(i, pair)| {
                    let merged = format!("{}{}", pair[0], pair[1]);
                    self.scores.get(&merged).map(|s| (i, *s))
                })
                .fold(None, |acc: Option<(usize, f32)>, (i, s)| match acc {
                    Some((_, best)) if best >= s => acc,
                    _ => Some((i, s)),
                });
            let Some((i, _)) = best else { break };
            let right = symbols.remove(i + 1);
            symbols[i].push_str(&right);
        }
        symbols
    }

    /// Mean of the piece vectors of every word.
    pub fn embed(&self, text: &str) -> Embedding {
        let mut sum = vec![0f32; self.dim];
        let mut n = 0usize;
        for piece in self.tokenize(text) {
            if let Some(v) = self.vectors.get(&piece) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                n += 1;
            }
        }
        (n > 0).then(|| sum.into_iter().map(|s| s / n as f32).collect())
    }

    /// Cosine of the two embeddings; `None` when either is zero.
    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        cosine_sim(&self.embed(a)?, &self.embed(b)?)
    }
}

/// `None` when either vector has zero norm.
pub fn cosine_sim(u: &[f32], v: &[f32]) -> Option<f64> {
    let (mut dot, mut nu, mut nv) = (0f64, 0f64, 0f64);
    for (x, y) in u.iter().zip(v) {
        let (x, y) = (f64::from(*x), f64::from(*y));
        dot += x * y;
        nu += x * x;
        nv += y * y;
    }
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    Some((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EmbeddingError + '_ {
    move |source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> EmbeddingError {
    EmbeddingError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read_vocab(path: &Path) -> Result<HashMap<String, f32>, EmbeddingError> {
    let content = fs::read_to_string(path).map_err(io_err(path))?;
    let mut scores = HashMap::new();
    for (n, line) in content.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (piece, score) = line
            .split_once('\t')
            .ok_or_else(|| format_err(path, format!("line {}: expected `piece<TAB>score`", n + 1)))?;
        let score: f32 = score
            .trim()
            .parse()
            .map_err(|_| format_err(path, format!("line {}: bad score `{score}`", n + 1)))?;
        scores.insert(piece.to_string(), score);
    }
    Ok(scores)
}

fn read_word2vec(path: &Path) -> Result<Vec<(String, Vec<f32>)>, EmbeddingError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header).map_err(io_err(path))?;
    let mut it = header.split_whitespace().map(str::parse::<usize>);
    let (Some(Ok(count)), Some(Ok(dim))) = (it.next(), it.next()) else {
        return Err(format_err(path, "expected `<count> <dim>` header"));
    };
    let binary = path
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.contains(".bin"));
    let mut out = Vec::with_capacity(count);
    if binary {
        for _ in 0..count {
            let mut word = Vec::new();
            loop {
                let mut byte = [0u8];
                reader.read_exact(&mut byte).map_err(io_err(path))?;
                match byte[0] {
                    b' ' => break,
                    b'\n' if word.is_empty() => {}
                    b => word.push(b),
                }
            }
            let mut buf = vec![0u8; dim * 4];
            reader.read_exact(&mut buf).map_err(io_err(path))?;
            let v = buf
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            let word = String::from_utf8(word).map_err(|_| format_err(path, "piece is not UTF-8"))?;
            out.push((word, v));
        }
    } else {
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let word = parts.next().unwrap_or_default().to_string();
            let v: Result<Vec<f32>, _> = parts.filter(|p| !p.is_empty()).map(str::parse).collect();
            let v = v.map_err(|_| format_err(path, format!("line {}: bad number", n + 2)))?;
            if v.len() != dim {
                return Err(format_err(path, format!("line {}: expected {dim} values", n + 2)));
            }
            out.push((word, v));
        }
        if out.len() != count {
            return Err(format_err(
                path,
                format!("header says {count} vectors, found {}", out.len()),
            ));
        }
    }
    Ok(out)
}
