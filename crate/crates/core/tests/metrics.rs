mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skosmt_core::simeval::{
    cosine_sim, exact_match, jaro_sim, jaro_winkler_sim, levenshtein, levenshtein_sim, EmbeddingModel, WORD_START,
};

use common::oracle::{dp_distance, oracle_jw, oracle_lev_sim};
use common::tag;

fn word() -> impl Strategy<Value = String> {
    prop_oneof!["[abcäöß]{0,10}", "\\PC{0,12}", "[Aa]rchiv(ieren|ierung|e)?"]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn levenshtein_matches_dp_oracle(a in word(), b in word()) {
        prop_assert_eq!(levenshtein(&a, &b), dp_distance(&a, &b));
        prop_assert_eq!(levenshtein_sim(&a, &b), oracle_lev_sim(&a, &b));
    }

    #[test]
    fn jaro_winkler_matches_oracle(a in word(), b in word()) {
        prop_assert!((jaro_winkler_sim(&a, &b) - oracle_jw(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn measures_are_symmetric_and_bounded(a in word(), b in word()) {
        for f in [exact_match, levenshtein_sim, jaro_sim, jaro_winkler_sim] {
            let s = f(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((s - f(&b, &a)).abs() < 1e-12);
            prop_assert_eq!(f(&a, &a), 1.0);
        }
        prop_assert!(jaro_winkler_sim(&a, &b) >= jaro_sim(&a, &b));
    }

    #[test]
    fn cosine_is_scale_invariant(
        v in prop::collection::vec(-10.0f32..10.0, 1..16),
        k in 0.01f32..100.0,
    ) {
        let scaled: Vec<f32> = v.iter().map(|x| x * k).collect();
        match (cosine_sim(&v, &v), cosine_sim(&v, &scaled)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-5),
            (None, None) => {}
            other => prop_assert!(false, "{other:?}"),
        }
    }
}

#[test]
fn reference_values() {
    assert!((jaro_winkler_sim("MARTHA", "MARHTA") - 0.9611).abs() < 1e-4);
    assert_eq!(levenshtein_sim("kitten", "sitting"), 1.0 - 3.0 / 7.0);
}

/// Subword pieces share a random stem direction; unrelated pieces are
/// independent draws.
fn toy_model() -> EmbeddingModel {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f32> { (0..25).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let stem = draw(&mut rng);
    let pieces = [
        "ie", "er", "en", "un", "ung", "ier", "iv", "ch", "sc", "sch", "schr", "schre", "schreib", "ar", "arc", "arch",
        "archiv",
    ];
    let mut vectors = Vec::new();
    let mut scores = HashMap::new();
    for (i, p) in pieces.iter().enumerate() {
        scores.insert(p.to_string(), i as f32);
    }
    let w = WORD_START;
    for (i, p) in [format!("{w}a"), format!("{w}ar"), format!("{w}arc"), format!("{w}arch")]
        .iter()
        .enumerate()
    {
        scores.insert(p.clone(), 20.0 + i as f32);
    }
    scores.insert(format!("{w}archiv"), 30.0);
    scores.insert(format!("{w}s"), 20.0);
    scores.insert(format!("{w}sch"), 21.0);
    scores.insert(format!("{w}schr"), 22.0);
    scores.insert(format!("{w}schreib"), 31.0);
    scores.insert("schreib".into(), 13.0);
    scores.insert("schrei".into(), 12.5);
    scores.insert("schre".into(), 12.0);
    scores.insert(format!("{w}schre"), 23.0);
    scores.insert(format!("{w}schrei"), 24.0);

    vectors.push((format!("{w}archiv"), stem.clone()));
    let noise = |rng: &mut ChaCha8Rng, base: &[f32]| -> Vec<f32> {
        base.iter().map(|x| x + rng.random_range(-0.2..0.2)).collect()
    };
    let ier = noise(&mut rng, &stem);
    vectors.push(("ier".into(), ier));
    let ung = noise(&mut rng, &stem);
    vectors.push(("ung".into(), ung));
    let en = draw(&mut rng);
    vectors.push(("en".into(), en));
    let schreib = draw(&mut rng);
    vectors.push((format!("{w}schreib"), schreib));
    EmbeddingModel::from_parts(tag("de"), vectors, scores).unwrap()
}

#[test]
fn morphological_variants_score_higher_than_unrelated_words() {
    let m = toy_model();
    assert_eq!(
        m.tokenize("Archivierung"),
        [format!("{WORD_START}archiv"), "ier".into(), "ung".into()]
    );
    assert_eq!(m.tokenize("Schreiben")[0], format!("{WORD_START}schreib"));
    let related = m.similarity("Archivieren", "Archivierung").unwrap();
    let unrelated = m.similarity("Archivieren", "Schreiben").unwrap();
    assert!(related > unrelated, "{related} <= {unrelated}");
    assert!((m.similarity("Archivieren", "Archivieren").unwrap() - 1.0).abs() < 1e-6);
}
