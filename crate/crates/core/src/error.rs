use alloc::string::String;
use alloc::vec::Vec;

use crate::metrics::View;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("metric {view} unavailable: examples {missing:?} lack the required annotation")]
    UnavailableView { view: View, missing: Vec<usize> },

    #[error("profiles built from different views ({left} vs {right})")]
    ViewMismatch { left: View, right: View },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("cosine distance undefined for a zero or non-finite vector")]
    DegenerateVector,

    #[error("corpus is already annotated; the fallback tagger only runs on raw-text input")]
    AlreadyAnnotated,

    #[error("need at least {required} examples, got {actual}")]
    TooFewExamples { required: usize, actual: usize },

    #[error("metric comparison needs at least 2 metrics, got {0}")]
    TooFewMetrics(usize),

    #[error("distance at ({row}, {col}) is negative or not finite")]
    InvalidDistance { row: usize, col: usize },

    #[error("threshold {0} outside the open interval (0, 1)")]
    InvalidThreshold(f64),

    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
