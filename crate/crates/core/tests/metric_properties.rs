//! Algebraic properties of the similarity and comparison metrics.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synlens_core::compare::frobenius_distance;
use synlens_core::metrics::{
    distance_matrix, embedding_distance, fallback_embed, ngram_similarity, DistanceMatrix, EmbeddingPolicy,
    NGramProfile, View,
};
use synlens_core::{AnnotatedExample, RawExample, TokenAnnotation, Upos};

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec!["a", "b", "c", "dog", "Dog", "bark", "x"]),
        1..8,
    )
    .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn example(id: usize, words: &[String]) -> AnnotatedExample {
    let tags = [Upos::Noun, Upos::Verb, Upos::Adp];
    let tokens = words
        .iter()
        .enumerate()
        .map(|(i, w)| TokenAnnotation::new(w.clone(), tags[(w.len() + i) % 3]))
        .collect();
    AnnotatedExample::new(RawExample::new(id, words.join(" ")), tokens)
}

proptest! {
    #[test]
    fn similarity_bounds_symmetry_identity(a in words(), b in words()) {
        let pa = NGramProfile::from_items(View::Token, &a);
        let pb = NGramProfile::from_items(View::Token, &b);
        let s = ngram_similarity(&pa, &pb).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, ngram_similarity(&pb, &pa).unwrap());
        prop_assert_eq!(ngram_similarity(&pa, &pa).unwrap(), 1.0);
    }

    #[test]
    fn ngram_counts_match_length(a in words()) {
        let p = NGramProfile::from_items(View::Pos, &a);
        for n in 1..=3 {
            prop_assert_eq!(p.count(n), a.len().saturating_sub(n - 1));
        }
    }

    #[test]
    fn matrices_are_permutation_equivariant(corpus in prop::collection::vec(words(), 2..8), seed in any::<u64>()) {
        let ex: Vec<AnnotatedExample> = corpus.iter().enumerate().map(|(i, w)| example(i, w)).collect();
        let mut perm: Vec<usize> = (0..ex.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let permuted: Vec<AnnotatedExample> = perm.iter().enumerate().map(|(i, &p)| {
            let mut e = ex[p].clone();
            e.raw.id = i;
            e
        }).collect();
        for view in [View::Token, View::Pos, View::Embedding] {
            let m = distance_matrix(&ex, view, EmbeddingPolicy::default()).unwrap();
            let pm = distance_matrix(&permuted, view, EmbeddingPolicy::default()).unwrap();
            prop_assert!(m.is_symmetric());
            for i in 0..ex.len() {
                prop_assert_eq!(m.get(i, i), 0.0);
                for j in 0..ex.len() {
                    prop_assert!((0.0..=1.0).contains(&m.get(i, j)));
                    prop_assert_eq!(pm.get(i, j), m.get(perm[i], perm[j]));
                }
            }
        }
    }

    #[test]
    fn fallback_embeddings_are_unit_and_bit_stable(a in words()) {
        let e = example(0, &a);
        let v = fallback_embed(&e, 64);
        let w = fallback_embed(&e.clone(), 64);
        prop_assert_eq!(
            v.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            w.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-9);
        prop_assert_eq!(embedding_distance(&v, &w).unwrap(), 0.0);
    }

    #[test]
    fn frobenius_scales_linearly(entries in prop::collection::vec(0.0f64..1.0, 9), other in prop::collection::vec(0.0f64..1.0, 9), c in -3.0f64..3.0) {
        let a = DistanceMatrix { metric: View::Token, n: 3, entries: entries.clone() };
        let b = DistanceMatrix { metric: View::Pos, n: 3, entries: other.clone() };
        let sa = DistanceMatrix { metric: View::Token, n: 3, entries: entries.iter().map(|x| x * c).collect() };
        let sb = DistanceMatrix { metric: View::Pos, n: 3, entries: other.iter().map(|x| x * c).collect() };
        let d = frobenius_distance(&a, &b).unwrap();
        prop_assert!((frobenius_distance(&sa, &sb).unwrap() - c.abs() * d).abs() < 1e-9);
    }
}
