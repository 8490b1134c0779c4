#![allow(dead_code)]

pub mod oracle;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use skosmt_core::provider::{ProviderDescriptor, ProviderError, ProviderErrorKind, ProviderRegistry};
use skosmt_core::skos::{parse_bytes, parse_thesaurus, RdfFormat, Thesaurus};
use skosmt_core::LanguageTag;

pub fn tag(s: &str) -> LanguageTag {
    LanguageTag::parse(s).unwrap()
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn load(name: &str) -> Thesaurus {
    let path = fixture(name);
    let format = RdfFormat::from_extension(&path).unwrap();
    parse_thesaurus(&path, format).unwrap()
}

pub fn turtle(ttl: &str) -> Thesaurus {
    Thesaurus::from_graph(parse_bytes(ttl.as_bytes(), RdfFormat::Turtle, "test").unwrap(), "test")
}

/// Providers `p0..pN`; provider i answers `table[text][i]`, and fails for
/// texts missing from the table.
pub fn table_registry(providers: usize, table: HashMap<String, Vec<String>>) -> ProviderRegistry {
    let table = Arc::new(table);
    let mut r = ProviderRegistry::new();
    for i in 0..providers {
        let table = Arc::clone(&table);
        let t = move |text: &str, _: &LanguageTag, _: &LanguageTag| {
            table
                .get(text)
                .and_then(|row| row.get(i))
                .cloned()
                .ok_or_else(|| ProviderError::new(ProviderErrorKind::MalformedResponse, "no entry"))
        };
        r.register(ProviderDescriptor::new(format!("p{i}")), Arc::new(t))
            .unwrap();
    }
    r
}

/// One provider replaying the published TaDiRAH en→de column.
pub fn tadirah_replay_registry() -> ProviderRegistry {
    let dict = skosmt_core::provider::mock::DictionaryProvider::load(fixture("tadirah_wokie.tsv")).unwrap();
    let mut r = ProviderRegistry::new();
    r.register(ProviderDescriptor::new("mock_dict"), Arc::new(dict))
        .unwrap();
    r
}

/// Character-level pieces with seeded random vectors; every word embeds.
pub fn char_model(lang: &str, seed: u64) -> skosmt_core::simeval::EmbeddingModel {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let alphabet = "abcdefghijklmnopqrstuvwxyzäöüß";
    let mut vectors = Vec::new();
    for c in alphabet.chars() {
        for piece in [c.to_string(), format!("{}{c}", skosmt_core::simeval::WORD_START)] {
            let v: Vec<f32> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
            vectors.push((piece, v));
        }
    }
    skosmt_core::simeval::EmbeddingModel::from_parts(tag(lang), vectors, HashMap::new()).unwrap()
}
