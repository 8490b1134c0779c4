//! Ensemble translation of SKOS thesauri.
//!
//! Labels are translated by an ordered set of machine-translation providers,
//! reconciled by frequency consensus and, when the providers disagree,
//! refined by a language model constrained to the existing candidates. The
//! [`simeval`] module scores back-translations against removed originals.

pub mod consensus;
pub mod lang;
pub mod llm;
pub mod pipeline;
pub mod provider;
pub mod simeval;
pub mod skos;
pub mod text;

#[cfg(test)]
mod testutil;

pub use lang::LanguageTag;
