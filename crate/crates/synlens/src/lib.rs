//! Corpus IO, analysis bundles, reports and the HTTP server around
//! `synlens-core`.

pub mod bundle;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod report;
pub mod serve;

pub use error::{Error, Result};
pub use synlens_core as core;
