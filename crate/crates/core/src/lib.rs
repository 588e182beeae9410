//! Syntactic and lexical diversity analysis for generated text corpora.
//!
//! The pipeline: annotate raw text (or accept pre-annotated examples),
//! build n-gram and embedding distance matrices, cluster them
//! agglomeratively, summarize each cluster with its best mixed token/POS
//! sequential pattern, find near-duplicate groups, and compare how much the
//! metrics disagree.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the CLI and
//! the HTTP server live in the `synlens` crate.

#![no_std]

extern crate alloc;

pub mod annotate;
pub mod cluster;
pub mod compare;
mod error;
pub mod metrics;
pub mod neardup;
pub mod patterns;
pub mod types;

pub use error::{Error, Result};
pub use types::{AnnotatedExample, Corpus, RawExample, SourceKind, Tag, TokenAnnotation, Upos};
