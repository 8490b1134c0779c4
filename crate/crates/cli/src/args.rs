use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use skosmt_core::skos::RdfFormat;

pub const DEFAULT_CACHE_PATH: &str = ".skosmt-cache.jsonl";

#[derive(Debug, Parser)]
#[command(
    name = "skosmt",
    version,
    about = "Translate SKOS thesauri with an ensemble of machine translation services",
    after_help = "API keys are read from WOKIE_<PROVIDER>_API_KEY and WOKIE_LLM_API_KEY.\n\
Exit codes: 0 success, 1 configuration error, 2 input error, 3 nothing translated."
)]
pub struct Cli {
    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add machine translations of a label property to a thesaurus
    Translate(TranslateArgs),
    /// Strip a language, translate it back and score against the originals
    Evaluate(EvaluateArgs),
    /// Show registered providers in effective priority order
    Providers(ProvidersArgs),
    /// Inspect or delete the response cache
    Cache(CacheArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Turtle,
    Rdfxml,
}

impl From<FormatArg> for RdfFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Turtle => RdfFormat::Turtle,
            FormatArg::Rdfxml => RdfFormat::RdfXml,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArg {
    /// TOML configuration file; flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// Options shared by `translate` and `evaluate`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArg,

    /// Label property: prefLabel, altLabel, definition or a full IRI [default: prefLabel]
    #[arg(long, value_name = "PROP")]
    pub prop: Option<String>,

    /// Share of agreeing candidates needed to accept without the LLM [default: 0.6]
    #[arg(long, value_name = "T")]
    pub threshold: Option<f64>,

    /// Candidates to gather per term before scoring [default: 5]
    #[arg(long, value_name = "N")]
    pub min_translations: Option<usize>,

    /// Comma-separated provider ids in priority order
    /// [default: lingvanex,google,modernmt,microsoft,yandex,argos,reverso,pons]
    #[arg(long, value_name = "IDS", value_delimiter = ',')]
    pub providers: Option<Vec<String>>,

    /// TSV dictionary (src, tgt, text, translation) served by the `mock_dict` provider
    #[arg(long, value_name = "FILE")]
    pub dictionary: Option<PathBuf>,

    /// Disable LLM refinement; disagreements fall back to the most frequent candidate
    #[arg(long)]
    pub no_llm: bool,

    /// LLM adapter: chat_completion or mock_echo [default: chat_completion]
    #[arg(long, value_name = "NAME")]
    pub llm_adapter: Option<String>,

    /// LLM model id [default: gemini-2.0-flash]
    #[arg(long, value_name = "MODEL")]
    pub llm_model: Option<String>,

    /// Chat-completions endpoint URL
    #[arg(long, value_name = "URL")]
    pub llm_endpoint: Option<String>,

    /// Sampling temperature [default: 0]
    #[arg(long, value_name = "T")]
    pub llm_temperature: Option<f64>,

    /// Translate terms even when they already have a target-language label
    #[arg(long)]
    pub force: bool,

    /// Annotate every translated concept with a skos:note
    #[arg(long)]
    pub mark_generated: bool,

    /// Language for untagged source labels (skipped otherwise)
    #[arg(long, value_name = "LANG")]
    pub assume_source_lang: Option<String>,

    /// Extra context passed to the LLM with every prompt
    #[arg(long, value_name = "TEXT")]
    pub context: Option<String>,

    /// Terms processed concurrently [default: 8]
    #[arg(long, value_name = "N")]
    pub max_inflight: Option<usize>,

    /// Response cache file [default: .skosmt-cache.jsonl]
    #[arg(long, value_name = "FILE")]
    pub cache: Option<PathBuf>,

    /// Do not read or write the response cache
    #[arg(long)]
    pub no_cache: bool,

    /// Input syntax [default: from the file extension]
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Output syntax [default: from --out, else turtle]
    #[arg(long, value_enum)]
    pub out_format: Option<FormatArg>,

    /// Write the enriched thesaurus here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// JSON-lines log of every LLM prompt and response
    #[arg(long, value_name = "FILE")]
    pub audit_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// Thesaurus to translate (Turtle or RDF/XML)
    pub input: PathBuf,

    /// Language to add, e.g. de
    #[arg(long, value_name = "LANG")]
    pub target_lang: Option<String>,

    /// Write the run report as JSON
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Multilingual thesaurus to evaluate against
    pub input: PathBuf,

    /// Language to remove and translate back
    #[arg(long, value_name = "LANG")]
    pub strip_lang: Option<String>,

    /// Comma-separated subset of exact,levenshtein,jaro_winkler,cosine
    /// [default: all four with --embeddings, the string measures otherwise]
    #[arg(long, value_name = "LIST")]
    pub measures: Option<String>,

    /// Write the per-term similarity report as JSON [default: stdout]
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,

    /// Write the aggregate scores as CSV
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Directory with BPEmb files for the stripped language
    #[arg(long, value_name = "DIR")]
    pub embeddings: Option<PathBuf>,

    /// BPEmb vocabulary size [default: 1000]
    #[arg(long, value_name = "N")]
    pub embedding_vocab_size: Option<usize>,

    /// BPEmb vector dimension [default: 25]
    #[arg(long, value_name = "N")]
    pub embedding_dim: Option<usize>,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("action").required(true))]
pub struct ProvidersArgs {
    /// List providers with rate limits and key status
    #[arg(long, group = "action")]
    pub list: bool,

    /// Print the providers supporting a language pair
    #[arg(long, num_args = 2, value_names = ["SRC", "TGT"], group = "action")]
    pub check_pair: Option<Vec<String>>,

    #[arg(long, value_name = "FILE")]
    pub dictionary: Option<PathBuf>,

    /// Comma-separated provider ids in priority order
    #[arg(long, value_name = "IDS", value_delimiter = ',')]
    pub providers: Option<Vec<String>>,

    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("action").required(true))]
pub struct CacheArgs {
    /// Entry counts per provider
    #[arg(long, group = "action")]
    pub stats: bool,

    /// Delete the cache file
    #[arg(long, group = "action")]
    pub clear: bool,

    /// Response cache file [default: .skosmt-cache.jsonl]
    #[arg(long, value_name = "FILE")]
    pub cache: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArg,
}
