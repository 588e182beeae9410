//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synlens::bundle::{build_analysis, AnalysisOptions, Bundle};
use synlens::core::annotate::Lexicon;
use synlens::core::cluster::{agglomerate, Linkage};
use synlens::core::compare::frobenius_distance;
use synlens::core::metrics::{
    embedding_distance, extract_profile, fallback_embed, ngram_similarity, DistanceMatrix, NGramProfile, View,
    DEFAULT_EMBED_DIM,
};
use synlens::core::patterns::{mine_patterns, score_pattern, DualItem, PatternItem, ScoreWeights};
use synlens::core::{AnnotatedExample, SourceKind};
use synlens::fixtures::Manifest;
use synlens::ingest::{load, CsvConfig, Format};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/generated")
        .join(name)
}

fn load_fixture(name: &str) -> (SourceKind, Vec<AnnotatedExample>) {
    let path = fixture(name);
    let format = Format::from_path(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let loaded = load(&bytes, format, &CsvConfig::default(), &Lexicon::english()).unwrap();
    assert!(loaded.diagnostics.is_empty(), "{:?}", loaded.diagnostics);
    (loaded.source_kind, loaded.examples)
}

fn manifest() -> Manifest {
    serde_json::from_slice(&std::fs::read(fixture("music.manifest.json")).unwrap()).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn metric_properties() -> Outcome {
    let (_, ex) = load_fixture("music.conllu");
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for view in View::ALL {
        let profiles: Option<Vec<NGramProfile>> = view
            .is_syntactic()
            .then(|| ex.iter().map(|e| extract_profile(e, view).unwrap()).collect());
        let vecs: Vec<Vec<f64>> = ex.iter().map(|e| fallback_embed(e, DEFAULT_EMBED_DIM)).collect();
        let sim = |i: usize, j: usize| -> f64 {
            match &profiles {
                Some(p) => ngram_similarity(&p[i], &p[j]).unwrap(),
                None => 1.0 - embedding_distance(&vecs[i], &vecs[j]).unwrap(),
            }
        };
        for _ in 0..200 {
            let (i, j) = (rng.gen_range(0..ex.len()), rng.gen_range(0..ex.len()));
            let (s, t) = (sim(i, j), sim(j, i));
            ensure((0.0..=1.0).contains(&s), || format!("{view} s({i},{j}) = {s}"))?;
            ensure(s == t, || format!("{view} asymmetric at ({i},{j}): {s} vs {t}"))?;
            ensure(sim(i, i) == 1.0, || format!("{view} s({i},{i}) = {}", sim(i, i)))?;
            ensure(1.0 - sim(i, i) == 0.0, || format!("{view} d({i},{i}) != 0"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("4 views x 200 pairs in {elapsed:.2?}"))
}

fn hand_similarity() -> Outcome {
    let a = NGramProfile::from_items(View::Token, &["dogs", "bark"]);
    let b = NGramProfile::from_items(View::Token, &["dogs", "bark", "loud"]);
    let s = ngram_similarity(&a, &b).unwrap();
    // (2/3 + 1/2) / 2 with the trigram order skipped
    let want = 7.0 / 12.0;
    ensure((s - want).abs() < 1e-12, || format!("got {s}"))?;
    Ok(format!("s = {s:.15}"))
}

/// Brute-force UPGMA over explicit member lists.
fn naive_upgma(d: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let n = d.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<((f64, usize, usize), usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (ma, mb) = (&clusters[a].1, &clusters[b].1);
                let sum: f64 = ma.iter().flat_map(|&i| mb.iter().map(move |&j| d[i][j])).sum();
                let mean = sum / (ma.len() * mb.len()) as f64;
                let (la, lb) = (*ma.iter().min().unwrap(), *mb.iter().min().unwrap());
                let key = (mean, la.min(lb), la.max(lb));
                if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                    best = Some((key, a, b));
                }
            }
        }
        let ((h, _, _), a, b) = best.unwrap();
        let (na, ma) = clusters[a].clone();
        let (nb, mb) = clusters[b].clone();
        let (left, right) = if ma.iter().min() < mb.iter().min() {
            (na, nb)
        } else {
            (nb, na)
        };
        out.push((left, right, h));
        let mut members = ma;
        members.extend(mb);
        clusters.remove(b);
        clusters.remove(a);
        clusters.push((n + step, members));
    }
    out
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.gen();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

fn clustering_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for round in 0..100 {
        let n = rng.gen_range(2..=10);
        let d = random_symmetric(&mut rng, n);
        let got = agglomerate(&DistanceMatrix::from_rows(View::Token, &d), Linkage::Average).unwrap();
        let want = naive_upgma(&d);
        for (g, w) in got.merges.iter().zip(&want) {
            ensure((g.left, g.right) == (w.0, w.1), || {
                format!(
                    "round {round}: merge ({}, {}) vs oracle ({}, {})",
                    g.left, g.right, w.0, w.1
                )
            })?;
            ensure((g.height - w.2).abs() < 1e-9, || {
                format!("round {round}: height {} vs oracle {}", g.height, w.2)
            })?;
        }
        ensure(got.merges.len() == want.len(), || format!("round {round}: merge count"))?;
    }
    Ok("100 matrices, n <= 10".into())
}

fn analyze_default(kind: SourceKind, ex: &[AnnotatedExample]) -> Bundle {
    build_analysis(kind, ex, vec![], &AnalysisOptions::default()).unwrap()
}

fn duplicate_adjacency() -> Outcome {
    let m = manifest();
    let (kind, ex) = load_fixture("music.csv");
    let bundle = analyze_default(kind, &ex);
    ensure(!m.duplicates.is_empty(), || "fixture plants no duplicates".into())?;
    // Exact duplicates are distinguished from other rows only by the
    // lexical metrics; under POS every row of a template is at distance 0.
    for view in [View::Token, View::Embedding] {
        let analysis = bundle.metric(view).ok_or(format!("{view} missing"))?;
        let order = &analysis.dendrogram.leaf_order;
        let mut pos = vec![0; order.len()];
        for (p, &leaf) in order.iter().enumerate() {
            pos[leaf] = p;
        }
        for &[a, b] in &m.duplicates {
            ensure(pos[a].abs_diff(pos[b]) == 1, || {
                format!("{view}: duplicates {a},{b} not adjacent")
            })?;
            for c in &analysis.clusterings {
                ensure(
                    c.clusters.iter().any(|cl| cl.ids.contains(&a) && cl.ids.contains(&b)),
                    || format!("{view} k={}: duplicates {a},{b} split", c.k),
                )?;
            }
        }
    }
    let pos_groups = &bundle.metric(View::Pos).ok_or("POS missing")?.near_duplicates;
    for fam in &m.families {
        ensure(
            pos_groups.iter().any(|g| fam.ids.iter().all(|id| g.ids.contains(id))),
            || format!("POS family {:?} not inside one near-duplicate group", fam.ids),
        )?;
    }
    Ok(format!(
        "{} pairs adjacent under TOKEN and EMBEDDING; {} families recovered under POS",
        m.duplicates.len(),
        m.families.len()
    ))
}

const TOKENS: &[&str] = &["music", "you", "can", "dance", "to", "songs", "like"];
const TAGS: &[&str] = &["NOUN", "PRON", "VERB", "ADP"];

/// Every gapped subsequence of length ≤ `max_len`, each position taken as
/// either its token or its tag, counted once per sequence.
fn enumerate_patterns(seqs: &[Vec<DualItem>], max_len: usize) -> BTreeMap<Vec<PatternItem>, usize> {
    let mut support = BTreeMap::new();
    for s in seqs {
        let n = s.len();
        let mut distinct = BTreeSet::new();
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if idx.len() > max_len {
                continue;
            }
            for pick in 0u32..(1 << idx.len()) {
                let items: Vec<PatternItem> = idx
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| {
                        if pick >> k & 1 == 0 {
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

fn pattern_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for round in 0..50 {
        let seqs: Vec<Vec<DualItem>> = (0..rng.gen_range(1..=8))
            .map(|_| {
                (0..rng.gen_range(1..=6))
                    .map(|_| {
                        DualItem::new(
                            TOKENS[rng.gen_range(0..TOKENS.len())],
                            TAGS[rng.gen_range(0..TAGS.len())],
                        )
                    })
                    .collect()
            })
            .collect();
        let min_support = 2;
        let want: BTreeMap<_, _> = enumerate_patterns(&seqs, 4)
            .into_iter()
            .filter(|&(_, s)| s >= min_support)
            .collect();
        let got: BTreeMap<_, _> = mine_patterns(&seqs, min_support, 4, &ScoreWeights::default())
            .into_iter()
            .map(|p| (p.items, p.support))
            .collect();
        ensure(got == want, || {
            format!("round {round}: {} mined vs {} enumerated", got.len(), want.len())
        })?;
        checked += want.len();
    }
    Ok(format!("50 clusters, {checked} patterns"))
}

fn scoring_ordering() -> Outcome {
    let w = ScoreWeights::default();
    let a = [
        PatternItem::token("music"),
        PatternItem::token("you"),
        PatternItem::token("can"),
        PatternItem::pos("VERB"),
        PatternItem::token("to"),
    ];
    let b = [
        PatternItem::token("music"),
        PatternItem::pos("PRON"),
        PatternItem::token("can"),
        PatternItem::pos("VERB"),
    ];
    let (sa, sb) = (score_pattern(&a, 4, &w), score_pattern(&b, 16, &w));
    ensure((sa - 10.0).abs() < 1e-12, || format!("first score {sa}"))?;
    ensure((sb - 8.0).abs() < 1e-12, || format!("second score {sb}"))?;
    ensure(sa > sb, || "ordering".into())?;
    Ok(format!("{sa} > {sb}"))
}

fn comparison_ordering() -> Outcome {
    let (kind, ex) = load_fixture("music.conllu");
    let bundle = analyze_default(kind, &ex);
    let c = bundle.comparison.as_ref().ok_or("no comparison")?;
    let d = |a, b| c.get(a, b).unwrap();
    let cross = [
        d(View::Token, View::Pos),
        d(View::Token, View::Dep),
        d(View::Embedding, View::Pos),
        d(View::Embedding, View::Dep),
    ];
    let lexical = d(View::Token, View::Embedding);
    let syntactic = d(View::Pos, View::Dep);
    let min_cross = cross.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(lexical < min_cross, || {
        format!("d(TOKEN,EMB) = {lexical} vs cross {cross:?}")
    })?;
    ensure(syntactic < min_cross, || {
        format!("d(POS,DEP) = {syntactic} vs cross {cross:?}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for round in 0..100 {
        let n = rng.gen_range(2..=30);
        let [a, b, m] = [0, 1, 2].map(|_| DistanceMatrix::from_rows(View::Token, &random_symmetric(&mut rng, n)));
        let f = |x: &DistanceMatrix, y: &DistanceMatrix| frobenius_distance(x, y).unwrap();
        ensure(f(&a, &a).abs() < 1e-9, || format!("round {round}: identity"))?;
        ensure((f(&a, &b) - f(&b, &a)).abs() < 1e-9, || {
            format!("round {round}: symmetry")
        })?;
        ensure(f(&a, &b) <= f(&a, &m) + f(&m, &b) + 1e-9, || {
            format!("round {round}: triangle")
        })?;
    }
    Ok(format!(
        "TOKEN-EMB {lexical:.2}, POS-DEP {syntactic:.2}, smallest cross {min_cross:.2}; 100 Frobenius triples"
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = fixture("music.conllu");
    let mut outputs = Vec::new();
    let mut slowest = Duration::ZERO;
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.json"));
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_synlens"))
            .arg("analyze")
            .arg("--input")
            .arg(&input)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "bundles differ".into())?;
    let bundle = Bundle::from_json(&outputs[0]).map_err(|e| e.to_string())?;
    ensure(bundle.examples.len() == 500, || {
        format!("{} examples", bundle.examples.len())
    })?;
    ensure(slowest < Duration::from_secs(30), || format!("took {slowest:?}"))?;
    Ok(format!(
        "{} identical bytes, slowest run {slowest:.2?}",
        outputs[0].len()
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("metric properties", metric_properties),
        ("hand-computed similarity 7/12", hand_similarity),
        ("clustering oracle", clustering_oracle),
        ("duplicate adjacency", duplicate_adjacency),
        ("pattern-mining oracle", pattern_oracle),
        ("scoring ordering", scoring_ordering),
        ("metric-comparison ordering", comparison_ordering),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
