//! Agglomerative clustering, leaf ordering and flat cuts.
//!
//! Node numbering follows the usual convention: leaves are `0..n`, the
//! cluster created by merge `s` is node `n + s`. A cluster's tie-break id
//! is its smallest leaf, so a tie between candidate pairs goes to the pair
//! with the smallest (min-id, max-id).

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;

/// Cluster counts materialized by [`flatten_all`] unless overridden.
pub const DEFAULT_KS: [usize; 7] = [3, 5, 10, 20, 30, 40, 50];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum Linkage {
    /// UPGMA: mean pairwise distance between members.
    #[default]
    Average,
    /// Maximum pairwise distance between members.
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Merge {
    /// The child holding the smaller leaf id.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    /// Leaves under the new node.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
    pub leaf_order: Vec<usize>,
}

impl Dendrogram {
    pub fn root(&self) -> usize {
        2 * self.n_leaves - 2
    }

    /// Node number → (left, right) children; `None` for leaves.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        node.checked_sub(self.n_leaves)
            .and_then(|s| self.merges.get(s))
            .map(|m| (m.left, m.right))
    }

    /// Leaves under `node`, in leaf order.
    pub fn leaves_under(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            match self.children(x) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(x),
            }
        }
        out
    }

    /// Merge height of an internal node, 0 for leaves.
    pub fn height(&self, node: usize) -> f64 {
        node.checked_sub(self.n_leaves)
            .and_then(|s| self.merges.get(s))
            .map_or(0.0, |m| m.height)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Clustering {
    pub k: usize,
    pub clusters: Vec<Vec<usize>>,
}

#[derive(Clone, Copy)]
struct Candidate {
    dist: f64,
    lo: usize,
    hi: usize,
}

impl Candidate {
    fn new(dist: f64, a: usize, b: usize) -> Self {
        Candidate {
            dist,
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    fn cmp(&self, other: &Candidate) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.lo.cmp(&other.lo))
            .then(self.hi.cmp(&other.hi))
    }

    fn partner(&self, slot: usize) -> usize {
        if self.lo == slot {
            self.hi
        } else {
            self.lo
        }
    }
}

struct Workspace {
    n: usize,
    linkage: Linkage,
    /// Average: sum of member distances. Complete: max member distance.
    link: Vec<f64>,
    size: Vec<usize>,
    active: Vec<bool>,
    best: Vec<Option<Candidate>>,
}

impl Workspace {
    fn dist(&self, a: usize, b: usize) -> f64 {
        let v = self.link[a * self.n + b];
        match self.linkage {
            Linkage::Average => v / (self.size[a] * self.size[b]) as f64,
            Linkage::Complete => v,
        }
    }

    fn scan_row(&self, slot: usize) -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        for other in 0..self.n {
            if other == slot || !self.active[other] {
                continue;
            }
            let c = Candidate::new(self.dist(slot, other), slot, other);
            if best.is_none_or(|b| c.cmp(&b) == Ordering::Less) {
                best = Some(c);
            }
        }
        best
    }
}

/// Agglomerative clustering of a distance matrix.
///
/// Slots are indexed by the smallest leaf of each active cluster; every
/// slot caches its best partner, and only rows whose cached partner was
/// consumed by a merge are rescanned.
pub fn agglomerate(d: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = d.n;
    if n < 2 {
        return Err(Error::TooFewExamples { required: 2, actual: n });
    }
    if let Some(pos) = d.entries.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidDistance {
            row: pos / n,
            col: pos % n,
        });
    }
    let mut ws = Workspace {
        n,
        linkage,
        link: d.entries.clone(),
        size: vec![1; n],
        active: vec![true; n],
        best: vec![None; n],
    };
    for slot in 0..n {
        ws.best[slot] = ws.scan_row(slot);
    }
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut last_height = 0.0f64;

    for step in 0..n - 1 {
        let pick = (0..n)
            .filter(|&s| ws.active[s])
            .filter_map(|s| ws.best[s])
            .min_by(|a, b| a.cmp(b))
            .expect("at least two active clusters");
        let (keep, gone) = (pick.lo, pick.hi);
        let (a, b) = (node_of[keep], node_of[gone]);
        let height = pick.dist.max(last_height);
        last_height = height;
        let size = ws.size[keep] + ws.size[gone];
        merges.push(Merge {
            left: a,
            right: b,
            height,
            size,
        });

        for k in 0..n {
            if k == keep || k == gone || !ws.active[k] {
                continue;
            }
            let (lk, lg) = (ws.link[keep * n + k], ws.link[gone * n + k]);
            let v = match linkage {
                Linkage::Average => lk + lg,
                Linkage::Complete => lk.max(lg),
            };
            ws.link[keep * n + k] = v;
            ws.link[k * n + keep] = v;
        }
        ws.size[keep] = size;
        ws.active[gone] = false;
        ws.best[gone] = None;
        node_of[keep] = n + step;

        ws.best[keep] = ws.scan_row(keep);
        for k in 0..n {
            if k == keep || !ws.active[k] {
                continue;
            }
            match ws.best[k] {
                Some(c) if c.partner(k) == keep || c.partner(k) == gone => {
                    ws.best[k] = ws.scan_row(k);
                }
                Some(c) => {
                    let fresh = Candidate::new(ws.dist(k, keep), k, keep);
                    if fresh.cmp(&c) == Ordering::Less {
                        ws.best[k] = Some(fresh);
                    }
                }
                None => ws.best[k] = ws.scan_row(k),
            }
        }
    }

    let mut dendro = Dendrogram {
        n_leaves: n,
        merges,
        leaf_order: Vec::new(),
    };
    dendro.leaf_order = leaf_order(&dendro);
    Ok(dendro)
}

/// In-order traversal; at each merge the child holding the smaller leaf id
/// goes left.
pub fn leaf_order(dendro: &Dendrogram) -> Vec<usize> {
    if dendro.n_leaves == 0 {
        return Vec::new();
    }
    if dendro.n_leaves == 1 {
        return vec![0];
    }
    dendro.leaves_under(dendro.root())
}

/// Cuts the dendrogram into `min(k, n)` clusters by undoing the last merges.
/// Clusters are ordered by their first leaf in leaf order.
pub fn flatten(dendro: &Dendrogram, k: usize) -> Clustering {
    let n = dendro.n_leaves;
    let target = k.clamp(1, n.max(1));
    let kept = n - target;
    let mut parent: Vec<Option<usize>> = vec![None; 2 * n];
    for (s, m) in dendro.merges.iter().take(kept).enumerate() {
        parent[m.left] = Some(n + s);
        parent[m.right] = Some(n + s);
    }
    let top = |mut x: usize| {
        while let Some(p) = parent[x] {
            x = p;
        }
        x
    };
    let mut slot_of_root: Vec<Option<usize>> = vec![None; 2 * n];
    let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(target);
    for &leaf in &dendro.leaf_order {
        let r = top(leaf);
        let slot = *slot_of_root[r].get_or_insert_with(|| {
            clusters.push(Vec::new());
            clusters.len() - 1
        });
        clusters[slot].push(leaf);
    }
    Clustering { k, clusters }
}

/// One clustering per requested `k`, restricted to `1..=n`, ascending.
pub fn flatten_all(dendro: &Dendrogram, ks: &[usize]) -> Vec<Clustering> {
    let mut ks: Vec<usize> = ks.iter().copied().filter(|&k| k >= 1 && k <= dendro.n_leaves).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.into_iter().map(|k| flatten(dendro, k)).collect()
}
