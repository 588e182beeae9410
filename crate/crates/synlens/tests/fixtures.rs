//! Fixture generation: determinism, planted structure, committed outputs.

use std::path::{Path, PathBuf};

use synlens::bundle::{build_analysis, AnalysisOptions};
use synlens::core::metrics::View;
use synlens::core::SourceKind;
use synlens::fixtures::{generate_fixture, write_fixture, Fixture, TemplateSpec};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn generate(name: &str) -> Fixture {
    let src = std::fs::read_to_string(root().join(format!("{name}.spec"))).unwrap();
    generate_fixture(&TemplateSpec::parse(&src).unwrap()).unwrap()
}

fn words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

#[test]
fn committed_fixtures_match_regeneration() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["music", "dialog"] {
        write_fixture(&generate(name), dir.path()).unwrap();
        for ext in ["csv", "conllu", "manifest.json"] {
            let file = format!("{name}.{ext}");
            let fresh = std::fs::read(dir.path().join(&file)).unwrap();
            let committed = std::fs::read(root().join("generated").join(&file)).unwrap();
            assert!(fresh == committed, "{file} is stale; rerun `synlens fixtures generate`");
        }
    }
}

#[test]
fn generation_is_byte_identical() {
    let (a, b) = (generate("music"), generate("music"));
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    assert_eq!(a.to_conllu(), b.to_conllu());
    assert_eq!(a.manifest, b.manifest);
}

#[test]
fn music_has_500_rows_and_single_word_swap_families() {
    let f = generate("music");
    assert_eq!(f.examples.len(), 500);
    assert!(f.manifest.families.len() >= 3);
    for fam in &f.manifest.families {
        let rows: Vec<Vec<String>> = fam.ids.iter().map(|&id| words(&f.examples[id].raw.text)).collect();
        for a in &rows {
            for b in &rows {
                if a == b {
                    continue;
                }
                assert_eq!(a.len(), b.len());
                let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
                assert_eq!(diff, 1, "{a:?} vs {b:?}");
            }
        }
    }
    let texts: Vec<&str> = f.examples.iter().map(|e| e.raw.text.as_str()).collect();
    let mut unique = texts.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(unique.len(), texts.len() - f.manifest.duplicates.len());
    for &[a, b] in &f.manifest.duplicates {
        assert_ne!(a, b);
        assert_eq!(texts[a], texts[b]);
    }
    for &id in &f.manifest.seeds {
        assert!(f.examples[id].raw.seed);
    }
    assert_eq!(f.examples.iter().filter(|e| e.raw.seed).count(), f.manifest.seeds.len());
}

#[test]
fn dialog_has_favorite_and_like_love_rows() {
    let f = generate("dialog");
    let texts: Vec<String> = f.examples.iter().map(|e| e.raw.text.to_lowercase()).collect();
    assert!(texts.iter().filter(|t| t.starts_with("what is your favorite ")).count() >= 3);
    let like_love = texts
        .iter()
        .filter(|t| {
            let w = words(t);
            w.len() > 3 && (w[0] == "i" || w[0] == "we") && (w[1] == "like" || w[1] == "love") && w[2] == "to"
        })
        .count();
    assert!(like_love >= 3);
}

#[test]
fn planted_families_are_recovered_end_to_end() {
    for name in ["music", "dialog"] {
        let f = generate(name);
        let bundle = build_analysis(SourceKind::Conllu, &f.examples, vec![], &AnalysisOptions::default()).unwrap();
        let groups = &bundle.metric(View::Pos).unwrap().near_duplicates;
        for fam in &f.manifest.families {
            assert!(
                groups.iter().any(|g| fam.ids.iter().all(|id| g.ids.contains(id))),
                "{name}: family {:?} not recovered",
                fam.ids
            );
        }
    }
}

#[test]
fn bad_spec_is_reported_with_line() {
    let err = TemplateSpec::parse("name = x\ncount = 3\ntemplate = {missing}|NOUN|0|root\n").unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn write_creates_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested");
    let written = write_fixture(&generate("dialog"), &out).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["dialog.csv", "dialog.conllu", "dialog.manifest.json"]);
    assert!(written.iter().all(|p| Path::new(p).exists()));
}
