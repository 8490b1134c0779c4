use std::cell::RefCell;
use std::fs::{self, File};
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};

use skosmt_core::pipeline::{write_audit_log, Pipeline, RunReport, TermOutcome};
use skosmt_core::provider::cache::{cache_stats, clear_cache};
use skosmt_core::provider::http::Service;
use skosmt_core::provider::Priority;
use skosmt_core::simeval::{
    evaluate_backtranslation, EmbeddingError, EmbeddingModel, EvalError, Measure, DEFAULT_DIM, DEFAULT_VOCAB_SIZE,
};
use skosmt_core::skos::{parse_thesaurus, serialize_to_vec, RdfFormat, Thesaurus};

use crate::args::{CacheArgs, EvaluateArgs, ProvidersArgs, TranslateArgs, DEFAULT_CACHE_PATH};
use crate::config::FileConfig;
use crate::registry::build_registry;
use crate::settings::{language, RunSettings};
use crate::CliError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_UNTRANSLATED: u8 = 3;

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("cannot write {}: {e}", path.display()))
}

fn read_input(path: &Path, format: RdfFormat) -> Result<Thesaurus, CliError> {
    parse_thesaurus(path, format).map_err(|e| CliError::Input(e.to_string()))
}

fn write_thesaurus(t: &Thesaurus, out: Option<&Path>, format: Option<RdfFormat>) -> Result<(), CliError> {
    let format = format
        .or_else(|| out.and_then(RdfFormat::from_extension))
        .unwrap_or(RdfFormat::Turtle);
    let bytes = serialize_to_vec(t, format).map_err(|e| CliError::Input(e.to_string()))?;
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| output_error(path, e)),
        None => io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| CliError::Input(format!("cannot write stdout: {e}"))),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| output_error(path, e))
}

fn run_pipeline(pipeline: &Pipeline, t: &Thesaurus) -> (Thesaurus, RunReport, Vec<TermOutcome>) {
    if !io::stderr().is_terminal() {
        return pipeline.run(t);
    }
    pipeline.run_with_progress(t, &|done, total, _| {
        eprint!("\r{done}/{total} terms");
        if done == total {
            eprintln!();
        }
    })
}

fn finish_run(
    settings: &RunSettings,
    report: &RunReport,
    outcomes: &[TermOutcome],
    report_path: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(path) = &settings.audit_log {
        let file = File::create(path).map_err(|e| output_error(path, e))?;
        write_audit_log(outcomes, BufWriter::new(file)).map_err(|e| output_error(path, e))?;
    }
    if let Some(path) = report_path {
        write_text(path, &report.to_json())?;
    }
    eprint!("{}", report.render_table());
    Ok(())
}

fn prepare(settings: &RunSettings, file: &FileConfig) -> Result<Pipeline, CliError> {
    let pipeline = settings.build_pipeline(file)?;
    for w in pipeline.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(pipeline)
}

pub fn translate(a: TranslateArgs) -> Result<u8, CliError> {
    let file = FileConfig::load(a.run.config.config.as_deref())?;
    let target = a
        .target_lang
        .or_else(|| file.target_lang.clone())
        .ok_or_else(|| CliError::Config("--target-lang is required".into()))?;
    let settings = RunSettings::resolve(language(&target, "--target-lang")?, &a.run, &file)?;
    let pipeline = prepare(&settings, &file)?;
    let thesaurus = read_input(&a.input, settings.format)?;

    let (enriched, report, outcomes) = run_pipeline(&pipeline, &thesaurus);
    write_thesaurus(&enriched, settings.out.as_deref(), settings.out_format)?;
    let report_path = a.report.or_else(|| file.report.clone());
    finish_run(&settings, &report, &outcomes, report_path.as_deref())?;
    Ok(if report.all_untranslated() {
        EXIT_UNTRANSLATED
    } else {
        EXIT_OK
    })
}

fn measures(raw: Option<&str>, with_embeddings: bool) -> Result<Vec<Measure>, CliError> {
    match raw {
        Some(list) => Measure::parse_list(list).map_err(|e| CliError::Config(format!("--measures: {e}"))),
        None if with_embeddings => Ok(Measure::ALL.to_vec()),
        None => Ok(Measure::ALL.iter().copied().filter(|m| *m != Measure::Cosine).collect()),
    }
}

fn embedding_error(e: EmbeddingError) -> CliError {
    match e {
        EmbeddingError::ModelMissing(_) => CliError::Config(format!("{e}; pass --embeddings DIR")),
        other => CliError::Input(other.to_string()),
    }
}

pub fn evaluate(a: EvaluateArgs) -> Result<u8, CliError> {
    let file = FileConfig::load(a.run.config.config.as_deref())?;
    let raw_lang = a
        .strip_lang
        .or_else(|| file.strip_lang.clone())
        .ok_or_else(|| CliError::Config("--strip-lang is required".into()))?;
    let lang = language(&raw_lang, "--strip-lang")?;
    let settings = RunSettings::resolve(lang.clone(), &a.run, &file)?;
    let embeddings: Option<PathBuf> = a.embeddings.or_else(|| file.embeddings.clone());
    let measures = measures(a.measures.as_deref().or(file.measures.as_deref()), embeddings.is_some())?;
    let model = match (&embeddings, measures.contains(&Measure::Cosine)) {
        (Some(dir), true) => {
            let vs = a
                .embedding_vocab_size
                .or(file.embedding_vocab_size)
                .unwrap_or(DEFAULT_VOCAB_SIZE);
            let dim = a.embedding_dim.or(file.embedding_dim).unwrap_or(DEFAULT_DIM);
            Some(EmbeddingModel::load_from_dir(dir, &lang, vs, dim).map_err(embedding_error)?)
        }
        (None, true) => return Err(embedding_error(EmbeddingError::ModelMissing(lang.to_string()))),
        _ => None,
    };
    let pipeline = prepare(&settings, &file)?;
    let thesaurus = read_input(&a.input, settings.format)?;

    let run: RefCell<Option<(Thesaurus, RunReport, Vec<TermOutcome>)>> = RefCell::new(None);
    let similarity = evaluate_backtranslation(
        &thesaurus,
        &lang,
        &settings.pipeline.prop,
        &measures,
        model.as_ref(),
        |stripped| {
            let (restored, report, outcomes) = run_pipeline(&pipeline, stripped);
            *run.borrow_mut() = Some((restored.clone(), report, outcomes));
            restored
        },
    )
    .map_err(|e| match e {
        EvalError::LanguageAbsent(_) => CliError::Input(e.to_string()),
        EvalError::Embedding(e) => embedding_error(e),
    })?;
    let (restored, report, outcomes) = run.into_inner().expect("translation ran");

    if let Some(out) = &settings.out {
        write_thesaurus(&restored, Some(out), settings.out_format)?;
    }
    finish_run(&settings, &report, &outcomes, None)?;
    let json = similarity.to_json();
    match a.report.or_else(|| file.report.clone()) {
        Some(path) => write_text(&path, &json)?,
        None => println!("{json}"),
    }
    if let Some(path) = a.csv.or_else(|| file.csv.clone()) {
        let f = File::create(&path).map_err(|e| output_error(&path, e))?;
        similarity.write_csv(f).map_err(|e| output_error(&path, e))?;
    }
    for m in &similarity.measures {
        eprintln!("{:<14}{:.6}", m.as_str(), similarity.macro_of(*m).unwrap_or(0.0));
    }
    eprintln!(
        "{:<14}{} of {}",
        "untranslated", similarity.untranslated, similarity.term_count
    );
    Ok(if report.all_untranslated() {
        EXIT_UNTRANSLATED
    } else {
        EXIT_OK
    })
}

pub fn providers(a: ProvidersArgs) -> Result<u8, CliError> {
    let file = FileConfig::load(a.config.config.as_deref())?;
    let registry = build_registry(&file, a.dictionary.as_deref())?;
    let configured = a.providers.or_else(|| file.providers.clone());
    let order = registry
        .resolve_order(configured.as_deref())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let priority = Priority::from_order(&order);
    let mut out = io::stdout().lock();
    let write_err = |e: io::Error| CliError::Input(format!("cannot write stdout: {e}"));

    if let Some(pair) = a.check_pair {
        let src = language(&pair[0], "--check-pair")?;
        let tgt = language(&pair[1], "--check-pair")?;
        let supporting: Vec<&str> = order
            .iter()
            .filter(|id| {
                registry
                    .get(id)
                    .is_some_and(|p| p.descriptor.supported_pairs.supports(&src, &tgt))
            })
            .map(String::as_str)
            .collect();
        if supporting.is_empty() {
            eprintln!("no provider supports {src} -> {tgt}");
        }
        for id in supporting {
            writeln!(out, "{id}").map_err(write_err)?;
        }
        return Ok(EXIT_OK);
    }

    writeln!(out, "{:>4}  {:<10}{:>10}  key", "rank", "provider", "req/s").map_err(write_err)?;
    for id in &order {
        let d = &registry.get(id).expect("resolved ids are registered").descriptor;
        let rate = d.rate_limit.map_or("-".to_string(), |r| format!("{r}"));
        let key = match Service::from_id(id) {
            Some(s) if s.requires_key() => {
                let var = s.api_key_env();
                let state = if std::env::var_os(&var).is_some_and(|v| !v.is_empty()) {
                    "set"
                } else {
                    "missing"
                };
                format!("{var} ({state})")
            }
            Some(s) => format!("{} (optional)", s.api_key_env()),
            None => "-".to_string(),
        };
        writeln!(out, "{:>4}  {id:<10}{rate:>10}  {key}", priority.rank(id)).map_err(write_err)?;
    }
    Ok(EXIT_OK)
}

pub fn cache(a: CacheArgs) -> Result<u8, CliError> {
    let file = FileConfig::load(a.config.config.as_deref())?;
    let path = a
        .cache
        .or_else(|| file.cache.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_PATH));
    if a.clear {
        clear_cache(&path).map_err(|e| output_error(&path, e))?;
        eprintln!("removed {}", path.display());
        return Ok(EXIT_OK);
    }
    if !path.exists() {
        println!("{}: no cache file", path.display());
        return Ok(EXIT_OK);
    }
    let stats = cache_stats(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    println!("file       {}", path.display());
    println!("entries    {}", stats.entries);
    println!("lines      {}", stats.lines);
    println!("malformed  {}", stats.malformed_lines);
    println!("bytes      {}", stats.bytes);
    for (provider, n) in &stats.per_provider {
        println!("  {provider:<10}{n:>8}");
    }
    Ok(EXIT_OK)
}
