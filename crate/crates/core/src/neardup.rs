//! Near-duplicate groups read off the dendrogram.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::cluster::Dendrogram;
use crate::error::{Error, Result};
use crate::metrics::{DistanceMatrix, View};

pub const DEFAULT_DUP_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct NearDuplicateGroup {
    pub metric: View,
    /// Members in leaf order.
    pub ids: Vec<usize>,
    pub max_distance: f64,
}

fn max_pairwise(d: &DistanceMatrix, ids: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for (a, &i) in ids.iter().enumerate() {
        for &j in &ids[a + 1..] {
            worst = worst.max(d.get(i, j));
        }
    }
    worst
}

/// Maximal subtrees merged at or below `threshold` whose members are all
/// pairwise within `threshold`, largest first.
///
/// Average linkage can merge a subtree below the threshold while one pair
/// inside it is farther apart; such a subtree is split into its children
/// and each is checked again.
pub fn near_duplicates(dendro: &Dendrogram, d: &DistanceMatrix, threshold: f64) -> Result<Vec<NearDuplicateGroup>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    if dendro.n_leaves != d.n {
        return Err(Error::DimensionMismatch {
            left: dendro.n_leaves,
            right: d.n,
        });
    }
    let mut groups = Vec::new();
    if dendro.n_leaves < 2 {
        return Ok(groups);
    }
    let mut stack = vec![dendro.root()];
    while let Some(node) = stack.pop() {
        let Some((left, right)) = dendro.children(node) else {
            continue;
        };
        if dendro.height(node) <= threshold {
            let ids = dendro.leaves_under(node);
            let worst = max_pairwise(d, &ids);
            if worst <= threshold {
                groups.push(NearDuplicateGroup {
                    metric: d.metric,
                    ids,
                    max_distance: worst,
                });
                continue;
            }
        }
        stack.push(right);
        stack.push(left);
    }
    groups.sort_by_key(|g| core::cmp::Reverse(g.ids.len()));
    Ok(groups)
}
