//! Deterministic template corpora.
//!
//! A spec is plain `key = value` text. Templates and fixed sentences are
//! written as whitespace-separated `form|UPOS|HEAD|DEPREL` tokens with
//! 1-based heads (0 marks the root); `{slot}` in the form position is
//! filled from `slot.NAME = w1, w2, ...`.
//!
//! ```text
//! name = tiny
//! count = 20
//! rng_seed = 1
//! families = 1
//! family_size = 3
//! duplicates = 1
//! slot.animal = cats, dogs, birds, fish
//! template = i|PRON|2|nsubj like|VERB|0|root {animal}|NOUN|2|obj
//! ```

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use synlens_core::{AnnotatedExample, RawExample, Tag, TokenAnnotation, Upos};

use crate::error::{Error, Result};
use crate::ingest::write_conllu;

/// One template position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateToken {
    pub form: Form,
    pub upos: Upos,
    /// 0-based; `None` for the root.
    pub head: Option<usize>,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Form {
    Literal(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub line: usize,
    pub tokens: Vec<TemplateToken>,
}

impl Template {
    fn slots(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().filter_map(|t| match &t.form {
            Form::Slot(s) => Some(s.as_str()),
            Form::Literal(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSpec {
    pub name: String,
    pub count: usize,
    pub rng_seed: u64,
    pub families: usize,
    pub family_size: usize,
    pub duplicates: usize,
    pub slots: BTreeMap<String, Vec<String>>,
    pub templates: Vec<Template>,
    /// Fixed sentences marked as seed examples.
    pub seeds: Vec<Template>,
    /// Fixed sentences unlike anything the templates produce.
    pub outliers: Vec<Template>,
}

fn spec_err(line: usize, message: impl Into<String>) -> Error {
    Error::FixtureSpec {
        line,
        message: message.into(),
    }
}

fn parse_tokens(line: usize, value: &str) -> Result<Template> {
    let mut tokens = Vec::new();
    let parts: Vec<&str> = value.split_whitespace().collect();
    for part in &parts {
        let fields: Vec<&str> = part.split('|').collect();
        let [form, upos, head, deprel] = fields[..] else {
            return Err(spec_err(line, format!("token {part:?} is not form|UPOS|HEAD|DEPREL")));
        };
        let form = match form.strip_prefix('{').and_then(|f| f.strip_suffix('}')) {
            Some(slot) if !slot.is_empty() => Form::Slot(slot.to_string()),
            _ if form.is_empty() => return Err(spec_err(line, "empty token form")),
            _ => Form::Literal(form.to_string()),
        };
        let upos: Upos = upos
            .parse()
            .map_err(|_| spec_err(line, format!("{upos:?} is not a Universal POS tag")))?;
        let head: usize = head.parse().map_err(|_| spec_err(line, format!("bad head {head:?}")))?;
        if head > parts.len() || head == tokens.len() + 1 {
            return Err(spec_err(
                line,
                format!("head {head} invalid for token {}", tokens.len() + 1),
            ));
        }
        if deprel.is_empty() {
            return Err(spec_err(line, "empty deprel"));
        }
        tokens.push(TemplateToken {
            form,
            upos,
            head: head.checked_sub(1),
            deprel: deprel.to_string(),
        });
    }
    if tokens.is_empty() {
        return Err(spec_err(line, "no tokens"));
    }
    let roots = tokens.iter().filter(|t| t.head.is_none()).count();
    if roots != 1 {
        return Err(spec_err(line, format!("expected one root, found {roots}")));
    }
    Ok(Template { line, tokens })
}

fn parse_count(line: usize, key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| spec_err(line, format!("{key} must be a non-negative integer, got {value:?}")))
}

impl TemplateSpec {
    pub fn parse(src: &str) -> Result<TemplateSpec> {
        let mut spec = TemplateSpec {
            name: String::new(),
            count: 0,
            rng_seed: 0,
            families: 0,
            family_size: 0,
            duplicates: 0,
            slots: BTreeMap::new(),
            templates: Vec::new(),
            seeds: Vec::new(),
            outliers: Vec::new(),
        };
        let mut seen_count = false;
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| spec_err(line, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => spec.name = value.to_string(),
                "count" => {
                    spec.count = parse_count(line, key, value)? as usize;
                    seen_count = true;
                }
                "rng_seed" => spec.rng_seed = parse_count(line, key, value)?,
                "families" => spec.families = parse_count(line, key, value)? as usize,
                "family_size" => spec.family_size = parse_count(line, key, value)? as usize,
                "duplicates" => spec.duplicates = parse_count(line, key, value)? as usize,
                "template" => spec.templates.push(parse_tokens(line, value)?),
                "seed" => spec.seeds.push(parse_tokens(line, value)?),
                "outlier" => spec.outliers.push(parse_tokens(line, value)?),
                _ => {
                    let Some(slot) = key.strip_prefix("slot.") else {
                        return Err(spec_err(line, format!("unknown key {key:?}")));
                    };
                    let words: Vec<String> = value
                        .split(',')
                        .map(|w| w.trim().to_string())
                        .filter(|w| !w.is_empty())
                        .collect();
                    if let Some(w) = words.iter().find(|w| w.contains(char::is_whitespace)) {
                        return Err(spec_err(line, format!("slot word {w:?} must be a single token")));
                    }
                    if spec.slots.insert(slot.to_string(), words).is_some() {
                        return Err(spec_err(line, format!("slot {slot:?} defined twice")));
                    }
                }
            }
        }
        if spec.name.is_empty() {
            return Err(spec_err(0, "missing name"));
        }
        if !seen_count {
            return Err(spec_err(0, "missing count"));
        }
        for t in spec.templates.iter().chain(&spec.seeds).chain(&spec.outliers) {
            for slot in t.slots() {
                match spec.slots.get(slot) {
                    None => return Err(spec_err(t.line, format!("slot {{{slot}}} has no word list"))),
                    Some(words) if words.is_empty() => {
                        return Err(spec_err(t.line, format!("slot {{{slot}}} has an empty word list")))
                    }
                    Some(_) => {}
                }
            }
        }
        if spec.families > 0 && spec.family_size < 2 {
            return Err(spec_err(0, "family_size must be at least 2"));
        }
        Ok(spec)
    }
}

/// A generated sentence with hand-assigned annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Row {
    tokens: Vec<(String, Upos, Option<usize>, String)>,
    seed: bool,
    label: String,
}

const NO_SPACE_BEFORE: [&str; 6] = [".", ",", "?", "!", ";", ":"];

fn render(forms: &[&str]) -> String {
    let mut out = String::new();
    for (i, f) in forms.iter().enumerate() {
        if i > 0 && !NO_SPACE_BEFORE.contains(f) {
            out.push(' ');
        }
        out.push_str(f);
    }
    out
}

impl Row {
    fn text(&self) -> String {
        render(&self.tokens.iter().map(|t| t.0.as_str()).collect::<Vec<_>>())
    }

    fn key(&self) -> String {
        self.text().to_lowercase()
    }
}

fn instantiate(t: &Template, fill: &BTreeMap<&str, &str>, seed: bool, label: &str) -> Row {
    let tokens = t
        .tokens
        .iter()
        .map(|tok| {
            let form = match &tok.form {
                Form::Literal(f) => f.clone(),
                Form::Slot(s) => fill[s.as_str()].to_string(),
            };
            (form, tok.upos, tok.head, tok.deprel.clone())
        })
        .collect();
    Row {
        tokens,
        seed,
        label: label.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    /// 1-based template number, as in the row label `t<N>`.
    pub template: usize,
    pub slot: String,
    pub ids: Vec<usize>,
}

/// What was planted where, by final example id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub count: usize,
    pub rng_seed: u64,
    pub seeds: Vec<usize>,
    pub outliers: Vec<usize>,
    pub families: Vec<Family>,
    pub duplicates: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub examples: Vec<AnnotatedExample>,
    pub manifest: Manifest,
}

impl Fixture {
    /// `text,seed,label` with a header row.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["text", "seed", "label"])?;
        for ex in &self.examples {
            w.write_record([
                ex.raw.text.as_str(),
                if ex.raw.seed { "true" } else { "false" },
                ex.raw.label.as_deref().unwrap_or(""),
            ])?;
        }
        w.into_inner().map_err(|e| Error::Fixture(e.to_string()))
    }

    pub fn to_conllu(&self) -> String {
        write_conllu(&self.examples)
    }

    pub fn manifest_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.manifest)?;
        s.push('\n');
        Ok(s)
    }
}

struct Generator<'a> {
    spec: &'a TemplateSpec,
    rng: ChaCha8Rng,
    rows: Vec<Row>,
    used: HashSet<String>,
}

const MAX_ATTEMPTS: usize = 10_000;

impl<'a> Generator<'a> {
    fn push_unique(&mut self, row: Row) -> Option<usize> {
        if !self.used.insert(row.key()) {
            return None;
        }
        self.rows.push(row);
        Some(self.rows.len() - 1)
    }

    fn random_fill(&mut self, t: &'a Template) -> BTreeMap<&'a str, &'a str> {
        let mut fill = BTreeMap::new();
        for slot in t.slots() {
            let words = &self.spec.slots[slot];
            fill.insert(slot, words[self.rng.gen_range(0..words.len())].as_str());
        }
        fill
    }

    fn fixed(&mut self, list: &'a [Template], seed: bool, label: &str) -> Result<Vec<usize>> {
        let mut ids = Vec::new();
        for t in list {
            let fill = self.random_fill(t);
            let row = instantiate(t, &fill, seed, label);
            let text = row.text();
            ids.push(
                self.push_unique(row)
                    .ok_or_else(|| Error::Fixture(format!("fixed sentence {text:?} appears twice")))?,
            );
        }
        Ok(ids)
    }

    fn family(&mut self) -> Result<(usize, String, Vec<usize>)> {
        let size = self.spec.family_size;
        let eligible: Vec<(usize, &'a str)> = self
            .spec
            .templates
            .iter()
            .enumerate()
            .flat_map(|(ti, t)| t.slots().map(move |s| (ti, s)))
            .filter(|(_, s)| self.spec.slots[*s].len() >= size)
            .collect();
        if eligible.is_empty() {
            return Err(Error::Fixture(format!("no template slot has {size} words to vary")));
        }
        for _ in 0..MAX_ATTEMPTS {
            let (ti, slot) = eligible[self.rng.gen_range(0..eligible.len())];
            let t = &self.spec.templates[ti];
            let mut fill = self.random_fill(t);
            let words: Vec<&str> = self.spec.slots[slot]
                .choose_multiple(&mut self.rng, size)
                .map(String::as_str)
                .collect();
            let label = format!("t{}", ti + 1);
            let rows: Vec<Row> = words
                .iter()
                .map(|w| {
                    fill.insert(slot, w);
                    instantiate(t, &fill, false, &label)
                })
                .collect();
            if rows.iter().any(|r| self.used.contains(&r.key())) {
                continue;
            }
            let ids = rows.into_iter().filter_map(|r| self.push_unique(r)).collect();
            return Ok((ti + 1, slot.to_string(), ids));
        }
        Err(Error::Fixture("could not place a near-duplicate family".into()))
    }

    fn random_unique(&mut self) -> Result<usize> {
        if self.spec.templates.is_empty() {
            return Err(Error::Fixture("spec has no templates".into()));
        }
        for _ in 0..MAX_ATTEMPTS {
            let ti = self.rng.gen_range(0..self.spec.templates.len());
            let t = &self.spec.templates[ti];
            let fill = self.random_fill(t);
            if let Some(id) = self.push_unique(instantiate(t, &fill, false, &format!("t{}", ti + 1))) {
                return Ok(id);
            }
        }
        Err(Error::Fixture(
            "templates cannot produce enough distinct sentences".into(),
        ))
    }
}

/// Expands the spec: fixed seeds and outliers, then near-duplicate
/// families, then exact duplicate pairs, then unique filler, shuffled.
pub fn generate_fixture(spec: &TemplateSpec) -> Result<Fixture> {
    let planted = spec.seeds.len() + spec.outliers.len() + spec.families * spec.family_size + 2 * spec.duplicates;
    if planted > spec.count {
        return Err(Error::Fixture(format!(
            "count {} is smaller than the {planted} planted rows",
            spec.count
        )));
    }
    let mut g = Generator {
        spec,
        rng: ChaCha8Rng::seed_from_u64(spec.rng_seed),
        rows: Vec::new(),
        used: HashSet::new(),
    };
    let seeds = g.fixed(&spec.seeds, true, "seed")?;
    let outliers = g.fixed(&spec.outliers, false, "outlier")?;
    let mut families = Vec::new();
    for _ in 0..spec.families {
        families.push(g.family()?);
    }
    let mut duplicates = Vec::new();
    for _ in 0..spec.duplicates {
        let a = g.random_unique()?;
        let copy = g.rows[a].clone();
        g.rows.push(copy);
        duplicates.push([a, g.rows.len() - 1]);
    }
    while g.rows.len() < spec.count {
        g.random_unique()?;
    }

    let mut order: Vec<usize> = (0..g.rows.len()).collect();
    order.shuffle(&mut g.rng);
    let mut new_id = vec![0; order.len()];
    for (id, &old) in order.iter().enumerate() {
        new_id[old] = id;
    }
    let remap = |ids: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = ids.iter().map(|&i| new_id[i]).collect();
        v.sort_unstable();
        v
    };

    let examples = order
        .iter()
        .enumerate()
        .map(|(id, &old)| {
            let row = &g.rows[old];
            let mut raw = RawExample::new(id, row.text());
            raw.seed = row.seed;
            raw.label = Some(row.label.clone());
            let tokens = row
                .tokens
                .iter()
                .map(|(form, upos, head, deprel)| TokenAnnotation {
                    surface: form.clone(),
                    pos: Tag::Upos(*upos),
                    head: *head,
                    deprel: Some(deprel.clone()),
                })
                .collect();
            AnnotatedExample::new(raw, tokens)
        })
        .collect();

    let manifest = Manifest {
        name: spec.name.clone(),
        count: spec.count,
        rng_seed: spec.rng_seed,
        seeds: remap(&seeds),
        outliers: remap(&outliers),
        families: families
            .into_iter()
            .map(|(template, slot, ids)| Family {
                template,
                slot,
                ids: remap(&ids),
            })
            .collect(),
        duplicates: duplicates
            .into_iter()
            .map(|pair| {
                let v = remap(&pair);
                [v[0], v[1]]
            })
            .collect(),
    };
    Ok(Fixture { examples, manifest })
}

/// Writes `<name>.csv`, `<name>.conllu` and `<name>.manifest.json`.
pub fn write_fixture(fixture: &Fixture, dir: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = &fixture.manifest.name;
    let files = [
        (format!("{name}.csv"), fixture.to_csv()?),
        (format!("{name}.conllu"), fixture.to_conllu().into_bytes()),
        (format!("{name}.manifest.json"), fixture.manifest_json()?.into_bytes()),
    ];
    let mut written = Vec::new();
    for (file, bytes) in files {
        let path = dir.join(file);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
