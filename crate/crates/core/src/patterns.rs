//! Cluster summaries by frequent sequential patterns over mixed token/POS items.
//!
//! Every position of an example offers two items, its lowercased surface
//! and its POS tag; a pattern item matches a position when it equals either.
//! Patterns are gapped subsequences and support counts sequences, not
//! occurrences. Mining grows patterns by prefix projection.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::types::AnnotatedExample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "UPPERCASE"))]
pub enum ItemKind {
    Token,
    Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PatternItem {
    pub kind: ItemKind,
    pub value: String,
}

impl PatternItem {
    pub fn token(value: impl Into<String>) -> Self {
        PatternItem {
            kind: ItemKind::Token,
            value: value.into(),
        }
    }

    pub fn pos(value: impl Into<String>) -> Self {
        PatternItem {
            kind: ItemKind::Pos,
            value: value.into(),
        }
    }

    pub fn matches(&self, at: &DualItem) -> bool {
        match self.kind {
            ItemKind::Token => self.value == at.token,
            ItemKind::Pos => self.value == at.pos,
        }
    }
}

impl fmt::Display for PatternItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.value)
    }
}

/// One sequence position: lowercased token and its POS tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualItem {
    pub token: String,
    pub pos: String,
}

impl DualItem {
    pub fn new(token: &str, pos: &str) -> Self {
        DualItem {
            token: token.to_lowercase(),
            pos: pos.into(),
        }
    }

    fn items(&self) -> [PatternItem; 2] {
        [
            PatternItem::token(self.token.clone()),
            PatternItem::pos(self.pos.clone()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Pattern {
    pub items: Vec<PatternItem>,
    pub support: usize,
    pub score: f64,
}

impl Pattern {
    pub fn token_count(&self) -> usize {
        self.items.iter().filter(|i| i.kind == ItemKind::Token).count()
    }

    pub fn pos_count(&self) -> usize {
        self.items.len() - self.token_count()
    }
}

impl fmt::Display for Pattern {
    /// `(music, you, can, VERB, to) ×12`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        write!(f, ") \u{d7}{}", self.support)
    }
}

/// Linear scoring weights.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScoreWeights {
    pub token: f64,
    pub pos: f64,
    /// Multiplies `log2(support)`.
    pub support_log2: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            token: 2.0,
            pos: 1.0,
            support_log2: 0.5,
        }
    }
}

impl ScoreWeights {
    pub fn score(&self, tokens: usize, pos: usize, support: usize) -> f64 {
        self.token * tokens as f64 + self.pos * pos as f64 + self.support_log2 * libm::log2(support as f64)
    }

    fn non_negative(&self) -> bool {
        self.token >= 0.0 && self.pos >= 0.0 && self.support_log2 >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SummaryConfig {
    pub weights: ScoreWeights,
    /// Minimum support as a percentage of cluster size, rounded up; never below 2.
    pub min_support_percent: usize,
    pub max_len: usize,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        SummaryConfig {
            weights: ScoreWeights::default(),
            min_support_percent: 30,
            max_len: 8,
        }
    }
}

impl SummaryConfig {
    pub fn min_support(&self, cluster_size: usize) -> usize {
        (self.min_support_percent * cluster_size).div_ceil(100).max(2)
    }
}

pub fn score_pattern(items: &[PatternItem], support: usize, weights: &ScoreWeights) -> f64 {
    let tokens = items.iter().filter(|i| i.kind == ItemKind::Token).count();
    weights.score(tokens, items.len() - tokens, support)
}

pub fn to_item_sequence(example: &AnnotatedExample) -> Vec<DualItem> {
    example
        .tokens
        .iter()
        .map(|t| DualItem::new(&t.surface, t.pos.as_str()))
        .collect()
}

/// Gapped-subsequence containment by leftmost matching.
pub fn contains(seq: &[DualItem], items: &[PatternItem]) -> bool {
    let mut it = seq.iter();
    items.iter().all(|p| it.any(|d| p.matches(d)))
}

/// Sequences re-encoded over item ids whose numeric order equals item order.
struct Encoded {
    vocab: Vec<PatternItem>,
    seqs: Vec<Vec<[u32; 2]>>,
}

impl Encoded {
    fn new(seqs: &[Vec<DualItem>]) -> Self {
        let all: BTreeSet<PatternItem> = seqs.iter().flatten().flat_map(|d| d.items()).collect();
        let vocab: Vec<PatternItem> = all.into_iter().collect();
        let index: BTreeMap<&PatternItem, u32> = vocab.iter().enumerate().map(|(i, p)| (p, i as u32)).collect();
        let seqs = seqs
            .iter()
            .map(|s| {
                s.iter()
                    .map(|d| {
                        let [t, p] = d.items();
                        [index[&t], index[&p]]
                    })
                    .collect()
            })
            .collect();
        Encoded { vocab, seqs }
    }

    fn decode(&self, ids: &[u32]) -> Vec<PatternItem> {
        ids.iter().map(|&i| self.vocab[i as usize].clone()).collect()
    }
}

/// A projected database entry: sequence index and first unconsumed position.
type Projection = Vec<(usize, usize)>;

struct Miner<'a> {
    enc: &'a Encoded,
    min_support: usize,
    max_len: usize,
    last_seen: Vec<usize>,
}

impl Miner<'_> {
    /// Frequent one-item extensions of a projection, in item order.
    fn extensions(&mut self, proj: &Projection) -> Vec<(u32, Projection)> {
        let mut found: BTreeMap<u32, Projection> = BTreeMap::new();
        self.last_seen.iter_mut().for_each(|x| *x = usize::MAX);
        for &(s, start) in proj {
            for (p, pair) in self.enc.seqs[s].iter().enumerate().skip(start) {
                for &item in pair {
                    let seen = &mut self.last_seen[item as usize];
                    if *seen != s {
                        *seen = s;
                        found.entry(item).or_default().push((s, p + 1));
                    }
                }
            }
        }
        found
            .into_iter()
            .filter(|(_, pr)| pr.len() >= self.min_support)
            .collect()
    }
}

fn initial_projection(enc: &Encoded) -> Projection {
    (0..enc.seqs.len()).map(|s| (s, 0)).collect()
}

/// All patterns with support ≥ `min_support` and length ≤ `max_len`.
///
/// Returned in depth-first prefix order; scores use `weights`.
pub fn mine_patterns(
    sequences: &[Vec<DualItem>],
    min_support: usize,
    max_len: usize,
    weights: &ScoreWeights,
) -> Vec<Pattern> {
    let enc = Encoded::new(sequences);
    let mut miner = Miner {
        enc: &enc,
        min_support: min_support.max(1),
        max_len,
        last_seen: vec![usize::MAX; enc.vocab.len()],
    };
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    let root = initial_projection(&enc);
    mine_rec(&mut miner, &root, &mut prefix, &mut |ids, support| {
        let items = enc.decode(ids);
        let score = score_pattern(&items, support, weights);
        out.push(Pattern { items, support, score });
    });
    out
}

fn mine_rec(miner: &mut Miner<'_>, proj: &Projection, prefix: &mut Vec<u32>, emit: &mut impl FnMut(&[u32], usize)) {
    if prefix.len() >= miner.max_len {
        return;
    }
    for (item, child) in miner.extensions(proj) {
        prefix.push(item);
        emit(prefix, child.len());
        mine_rec(miner, &child, prefix, emit);
        prefix.pop();
    }
}

/// Strict preference order for summaries: score, then support, then items.
pub fn better(a: &Pattern, b: &Pattern) -> bool {
    compare_patterns(a, b) == Ordering::Less
}

/// `Less` means `a` is preferred.
pub fn compare_patterns(a: &Pattern, b: &Pattern) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.support.cmp(&a.support))
        .then_with(|| a.items.cmp(&b.items))
}

struct Best {
    ids: Vec<u32>,
    tokens: usize,
    support: usize,
    score: f64,
}

/// Highest-scoring pattern among `sequences`, or `None` if nothing reaches
/// `min_support`. Equivalent to taking the best of [`mine_patterns`], but
/// prunes prefixes whose best possible extension cannot beat the incumbent.
pub fn best_pattern(
    sequences: &[Vec<DualItem>],
    min_support: usize,
    max_len: usize,
    weights: &ScoreWeights,
) -> Option<Pattern> {
    if !weights.non_negative() {
        let mut all = mine_patterns(sequences, min_support, max_len, weights);
        all.sort_by(compare_patterns);
        return all.into_iter().next();
    }
    let enc = Encoded::new(sequences);
    let pos_start = enc
        .vocab
        .iter()
        .position(|p| p.kind == ItemKind::Pos)
        .unwrap_or(enc.vocab.len()) as u32;
    let mut miner = Miner {
        enc: &enc,
        min_support: min_support.max(1),
        max_len,
        last_seen: vec![usize::MAX; enc.vocab.len()],
    };
    let mut best: Option<Best> = None;
    let mut prefix = Vec::new();
    let root = initial_projection(&enc);
    search(&mut miner, &root, &mut prefix, 0, pos_start, weights, &mut best);
    best.map(|b| {
        let items = enc.decode(&b.ids);
        debug_assert_eq!(items.iter().filter(|i| i.kind == ItemKind::Token).count(), b.tokens);
        Pattern {
            items,
            support: b.support,
            score: b.score,
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    miner: &mut Miner<'_>,
    proj: &Projection,
    prefix: &mut Vec<u32>,
    tokens: usize,
    pos_start: u32,
    w: &ScoreWeights,
    best: &mut Option<Best>,
) {
    if prefix.len() >= miner.max_len {
        return;
    }
    for (item, child) in miner.extensions(proj) {
        let support = child.len();
        let t = tokens + usize::from(item < pos_start);
        prefix.push(item);
        let len = prefix.len();
        let score = w.score(t, len - t, support);
        let wins = match best {
            None => true,
            Some(b) => match score.total_cmp(&b.score) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    // ids are assigned in item order, so id order is item order
                    support > b.support || (support == b.support && prefix.as_slice() < b.ids.as_slice())
                }
            },
        };
        if wins {
            *best = Some(Best {
                ids: prefix.clone(),
                tokens: t,
                support,
                score,
            });
        }
        let remaining = child
            .iter()
            .map(|&(s, p)| miner.enc.seqs[s].len() - p)
            .max()
            .unwrap_or(0)
            .min(miner.max_len - len);
        let bound = w.score(t, len - t, support) + w.token.max(w.pos) * remaining as f64;
        let promising = remaining > 0 && best.as_ref().is_none_or(|b| bound >= b.score);
        if promising {
            search(miner, &child, prefix, t, pos_start, w, best);
        }
        prefix.pop();
    }
}

/// The summary pattern of one cluster; `None` for clusters too small to
/// reach the minimum support.
pub fn summarize_cluster(cluster: &[usize], examples: &[AnnotatedExample], config: &SummaryConfig) -> Option<Pattern> {
    let min_support = config.min_support(cluster.len());
    if cluster.len() < min_support {
        return None;
    }
    let seqs: Vec<Vec<DualItem>> = cluster.iter().map(|&id| to_item_sequence(&examples[id])).collect();
    best_pattern(&seqs, min_support, config.max_len, &config.weights)
}
