//! Prefix-projection mining checked against exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synlens_core::patterns::{
    best_pattern, compare_patterns, contains, mine_patterns, DualItem, PatternItem, ScoreWeights,
};

const TOKENS: &[&str] = &["music", "you", "can", "dance", "to", "songs", "like"];
const TAGS: &[&str] = &["NOUN", "PRON", "VERB", "ADP"];

fn random_cluster(rng: &mut ChaCha8Rng) -> Vec<Vec<DualItem>> {
    let count = rng.gen_range(1..=8);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=6);
            (0..len)
                .map(|_| {
                    DualItem::new(
                        TOKENS[rng.gen_range(0..TOKENS.len())],
                        TAGS[rng.gen_range(0..TAGS.len())],
                    )
                })
                .collect()
        })
        .collect()
}

/// Every distinct pattern of length ≤ `max_len` of every sequence, counted
/// once per sequence.
fn enumerate(seqs: &[Vec<DualItem>], max_len: usize) -> BTreeMap<Vec<PatternItem>, usize> {
    let mut support: BTreeMap<Vec<PatternItem>, usize> = BTreeMap::new();
    for s in seqs {
        let mut distinct: BTreeSet<Vec<PatternItem>> = BTreeSet::new();
        let n = s.len();
        for mask in 1u32..(1 << n) {
            let positions: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            if positions.len() > max_len {
                continue;
            }
            for choice in 0u32..(1 << positions.len()) {
                let items = positions
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| {
                        if choice & (1 << k) == 0 {
                            PatternItem::token(s[p].token.clone())
                        } else {
                            PatternItem::pos(s[p].pos.clone())
                        }
                    })
                    .collect();
                distinct.insert(items);
            }
        }
        for p in distinct {
            *support.entry(p).or_insert(0) += 1;
        }
    }
    support
}

#[test]
fn mining_matches_exhaustive_enumeration_on_50_clusters() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let w = ScoreWeights::default();
    for round in 0..50 {
        let seqs = random_cluster(&mut rng);
        let min_support = rng.gen_range(2..=3);
        let want: BTreeMap<Vec<PatternItem>, usize> = enumerate(&seqs, 4)
            .into_iter()
            .filter(|(_, s)| *s >= min_support)
            .collect();
        let got: BTreeMap<Vec<PatternItem>, usize> = mine_patterns(&seqs, min_support, 4, &w)
            .into_iter()
            .map(|p| (p.items, p.support))
            .collect();
        assert_eq!(got, want, "round {round}: {seqs:?}");
    }
}

#[test]
fn mining_up_to_length_four_is_unchanged_by_longer_guard() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let w = ScoreWeights::default();
    for _ in 0..20 {
        let seqs = random_cluster(&mut rng);
        let short: BTreeSet<_> = mine_patterns(&seqs, 2, 4, &w).into_iter().map(|p| p.items).collect();
        let long: BTreeSet<_> = mine_patterns(&seqs, 2, 8, &w)
            .into_iter()
            .filter(|p| p.items.len() <= 4)
            .map(|p| p.items)
            .collect();
        assert_eq!(short, long);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn supports_are_exact_and_antimonotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seqs = random_cluster(&mut rng);
        let pats = mine_patterns(&seqs, 2, 8, &ScoreWeights::default());
        let by_items: BTreeMap<_, _> = pats.iter().map(|p| (p.items.clone(), p.support)).collect();
        for p in &pats {
            let direct = seqs.iter().filter(|s| contains(s, &p.items)).count();
            prop_assert_eq!(direct, p.support);
            prop_assert!(p.support <= seqs.len());
            if p.items.len() > 1 {
                let prefix = &p.items[..p.items.len() - 1];
                prop_assert!(by_items[prefix] >= p.support);
                for skip in 0..p.items.len() {
                    let mut sub = p.items.clone();
                    sub.remove(skip);
                    prop_assert!(by_items[&sub] >= p.support);
                }
            }
        }
    }

    #[test]
    fn pruned_search_finds_the_mined_maximum(seed in any::<u64>(), min_support in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seqs = random_cluster(&mut rng);
        let w = ScoreWeights::default();
        let mut all = mine_patterns(&seqs, min_support, 8, &w);
        all.sort_by(compare_patterns);
        let best = best_pattern(&seqs, min_support, 8, &w);
        prop_assert_eq!(best, all.into_iter().next());
    }
}
