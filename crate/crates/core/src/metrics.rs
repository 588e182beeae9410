//! Per-example feature profiles and pairwise distance matrices.
//!
//! Three syntactic views (surface tokens, POS tags, dependency labels) are
//! compared by n-gram overlap for n = 1, 2, 3. For each n that both examples
//! can populate, the multiset intersection is divided by the larger of the
//! two n-gram counts; the similarity is the mean over those n. For unigrams
//! the denominator is the token count of the longer example. Per-n
//! normalization keeps self-similarity at exactly 1.
//!
//! The fourth view compares embeddings by cosine distance, using either
//! vectors supplied with the corpus or a feature-hashing fallback.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::AnnotatedExample;

/// Joins the items of an n-gram key.
pub const GRAM_SEPARATOR: char = '\u{241F}';

/// Longest n-gram order used by the syntactic views.
pub const MAX_N: usize = 3;

pub const DEFAULT_EMBED_DIM: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "UPPERCASE"))]
pub enum View {
    Token,
    Pos,
    Dep,
    Embedding,
}

impl View {
    pub const ALL: [View; 4] = [View::Token, View::Pos, View::Dep, View::Embedding];

    pub fn as_str(self) -> &'static str {
        match self {
            View::Token => "TOKEN",
            View::Pos => "POS",
            View::Dep => "DEP",
            View::Embedding => "EMBEDDING",
        }
    }

    pub fn is_syntactic(self) -> bool {
        !matches!(self, View::Embedding)
    }

    pub fn parse(s: &str) -> Option<View> {
        let up = s.trim().to_ascii_uppercase();
        match up.as_str() {
            "TOKEN" | "TOK" => Some(View::Token),
            "POS" => Some(View::Pos),
            "DEP" | "DEPENDENCY" => Some(View::Dep),
            "EMBEDDING" | "EMB" => Some(View::Embedding),
            _ => None,
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Multisets of 1-, 2- and 3-grams over one view of one example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramProfile {
    pub view: View,
    pub length: usize,
    /// `grams[n - 1]` maps each n-gram key to its multiplicity.
    pub grams: [BTreeMap<String, u32>; MAX_N],
}

impl NGramProfile {
    /// Builds a profile from an already-projected item sequence.
    pub fn from_items<S: AsRef<str>>(view: View, items: &[S]) -> Self {
        let mut grams: [BTreeMap<String, u32>; MAX_N] = Default::default();
        for (n_idx, map) in grams.iter_mut().enumerate() {
            let n = n_idx + 1;
            for window in items.windows(n) {
                let mut key = String::new();
                for (i, item) in window.iter().enumerate() {
                    if i > 0 {
                        key.push(GRAM_SEPARATOR);
                    }
                    key.push_str(item.as_ref());
                }
                *map.entry(key).or_insert(0) += 1;
            }
        }
        NGramProfile {
            view,
            length: items.len(),
            grams,
        }
    }

    /// Total number of n-grams (with multiplicity) of order `n`.
    pub fn count(&self, n: usize) -> usize {
        self.grams[n - 1].values().map(|&c| c as usize).sum()
    }
}

fn view_items(example: &AnnotatedExample, view: View) -> Result<Vec<String>> {
    match view {
        View::Token => Ok(example.tokens.iter().map(|t| t.surface.to_lowercase()).collect()),
        View::Pos => Ok(example.tokens.iter().map(|t| t.pos.as_str().into()).collect()),
        View::Dep => {
            if !example.has_dependencies {
                return Err(Error::UnavailableView {
                    view,
                    missing: vec![example.id()],
                });
            }
            Ok(example
                .tokens
                .iter()
                .map(|t| t.deprel.clone().unwrap_or_default())
                .collect())
        }
        View::Embedding => Err(Error::ViewMismatch {
            left: View::Embedding,
            right: View::Token,
        }),
    }
}

/// Profile of one example under a syntactic view.
pub fn extract_profile(example: &AnnotatedExample, view: View) -> Result<NGramProfile> {
    let items = view_items(example, view)?;
    Ok(NGramProfile::from_items(view, &items))
}

fn multiset_intersection(a: &BTreeMap<String, u32>, b: &BTreeMap<String, u32>) -> usize {
    let mut ia = a.iter().peekable();
    let mut ib = b.iter().peekable();
    let mut total = 0usize;
    while let (Some((ka, ca)), Some((kb, cb))) = (ia.peek(), ib.peek()) {
        match ka.cmp(kb) {
            Ordering::Less => {
                ia.next();
            }
            Ordering::Greater => {
                ib.next();
            }
            Ordering::Equal => {
                total += (**ca).min(**cb) as usize;
                ia.next();
                ib.next();
            }
        }
    }
    total
}

/// Mean over n of the normalized multiset n-gram overlap.
pub fn ngram_similarity(a: &NGramProfile, b: &NGramProfile) -> Result<f64> {
    if a.view != b.view {
        return Err(Error::ViewMismatch {
            left: a.view,
            right: b.view,
        });
    }
    let mut sum = 0.0;
    let mut valid = 0usize;
    for n in 1..=MAX_N {
        let (ca, cb) = (a.count(n), b.count(n));
        if ca == 0 || cb == 0 {
            continue;
        }
        let overlap = multiset_intersection(&a.grams[n - 1], &b.grams[n - 1]);
        sum += overlap as f64 / ca.max(cb) as f64;
        valid += 1;
    }
    if valid == 0 {
        return Ok(0.0);
    }
    Ok(sum / valid as f64)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn hash_feature(v: &mut [f64], feature: &[u8]) {
    let h = fnv1a64(feature);
    let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
    let bucket = ((h >> 1) % v.len() as u64) as usize;
    v[bucket] += sign;
}

/// Signed feature hashing of lowercased unigrams and bigrams, L2-normalized.
///
/// An example with `t` tokens contributes `2t - 1` unit features. An odd
/// number of ±1 contributions cannot cancel in every bucket, so the result
/// is never the zero vector for a non-empty example.
pub fn fallback_embed(example: &AnnotatedExample, dim: usize) -> Vec<f64> {
    assert!(dim > 0, "embedding dimension must be positive");
    let words: Vec<String> = example.tokens.iter().map(|t| t.surface.to_lowercase()).collect();
    let mut v = vec![0.0; dim];
    for w in &words {
        hash_feature(&mut v, w.as_bytes());
    }
    let mut buf = String::new();
    for pair in words.windows(2) {
        buf.clear();
        buf.push_str(&pair[0]);
        buf.push(GRAM_SEPARATOR);
        buf.push_str(&pair[1]);
        hash_feature(&mut v, buf.as_bytes());
    }
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

/// `1 - cos(u, v)`, clamped to `[0, 1]`.
pub fn embedding_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if u == v && !u.is_empty() && u.iter().all(|x| x.is_finite()) && u.iter().any(|&x| x != 0.0) {
        return Ok(0.0);
    }
    let (nu, nv) = (norm(u), norm(v));
    if !(nu.is_finite() && nv.is_finite()) || nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateVector);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((1.0 - dot / (nu * nv)).clamp(0.0, 1.0))
}

/// Square matrix of pairwise distances, row-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DistanceMatrix {
    pub metric: View,
    pub n: usize,
    pub entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Fills the upper triangle from `f(i, j)` (`i < j`) and mirrors it.
    pub fn from_fn<E>(
        metric: View,
        n: usize,
        mut f: impl FnMut(usize, usize) -> core::result::Result<f64, E>,
    ) -> core::result::Result<Self, E> {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j)?;
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        Ok(DistanceMatrix { metric, n, entries })
    }

    /// Builds a matrix from explicit rows. Panics unless the rows are square.
    pub fn from_rows(metric: View, rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "distance matrix must be square");
            entries.extend_from_slice(r);
        }
        DistanceMatrix { metric, n, entries }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// How the embedding view obtains vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingPolicy {
    /// Dimension of the hashing fallback, or `None` to require supplied vectors.
    pub fallback_dim: Option<usize>,
}

impl Default for EmbeddingPolicy {
    fn default() -> Self {
        EmbeddingPolicy {
            fallback_dim: Some(DEFAULT_EMBED_DIM),
        }
    }
}

/// Ids of examples that cannot participate in `view`; empty when available.
pub fn missing_for_view(examples: &[AnnotatedExample], view: View, policy: EmbeddingPolicy) -> Vec<usize> {
    match view {
        View::Token | View::Pos => Vec::new(),
        View::Dep => examples
            .iter()
            .filter(|e| !e.has_dependencies)
            .map(|e| e.id())
            .collect(),
        View::Embedding => {
            if policy.fallback_dim.is_some() {
                Vec::new()
            } else {
                examples
                    .iter()
                    .filter(|e| e.raw.embedding.is_none())
                    .map(|e| e.id())
                    .collect()
            }
        }
    }
}

/// The vectors used by the embedding view. Supplied vectors win when every
/// example has one; otherwise the fallback is applied to all examples so
/// the matrix never mixes two embedding spaces.
pub fn corpus_embeddings(examples: &[AnnotatedExample], policy: EmbeddingPolicy) -> Result<Vec<Vec<f64>>> {
    if examples.iter().all(|e| e.raw.embedding.is_some()) {
        return Ok(examples
            .iter()
            .map(|e| e.raw.embedding.clone().unwrap_or_default())
            .collect());
    }
    match policy.fallback_dim {
        Some(dim) => Ok(examples.iter().map(|e| fallback_embed(e, dim)).collect()),
        None => Err(Error::UnavailableView {
            view: View::Embedding,
            missing: missing_for_view(examples, View::Embedding, policy),
        }),
    }
}

/// Pairwise distance matrix for one view over the corpus.
pub fn distance_matrix(examples: &[AnnotatedExample], view: View, policy: EmbeddingPolicy) -> Result<DistanceMatrix> {
    let missing = missing_for_view(examples, view, policy);
    if !missing.is_empty() {
        return Err(Error::UnavailableView { view, missing });
    }
    let n = examples.len();
    if view == View::Embedding {
        let vecs = corpus_embeddings(examples, policy)?;
        return DistanceMatrix::from_fn(view, n, |i, j| embedding_distance(&vecs[i], &vecs[j]));
    }
    let profiles = examples
        .iter()
        .map(|e| extract_profile(e, view))
        .collect::<Result<Vec<_>>>()?;
    DistanceMatrix::from_fn(view, n, |i, j| {
        ngram_similarity(&profiles[i], &profiles[j]).map(|s| (1.0 - s).clamp(0.0, 1.0))
    })
}
