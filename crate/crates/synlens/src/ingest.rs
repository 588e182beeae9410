//! CSV and CoNLL-U input.
//!
//! Bad rows and sentences are dropped one at a time with a diagnostic;
//! only structural problems (missing text column, unreadable CSV,
//! inconsistent embedding dimensions, fewer than two usable examples)
//! fail the whole file.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use synlens_core::{AnnotatedExample, Corpus, RawExample, SourceKind, Tag, TokenAnnotation};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    /// The row or sentence was kept.
    Warning,
    /// The row or sentence was dropped.
    Rejected,
}

/// A problem tied to a line of the input file (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: u64,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn warn(line: u64, message: impl Into<String>) -> Self {
        Diagnostic {
            line,
            severity: Severity::Warning,
            message: message.into(),
        }
    }

    fn reject(line: u64, message: impl Into<String>) -> Self {
        Diagnostic {
            line,
            severity: Severity::Rejected,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.severity {
            Severity::Warning => "warning",
            Severity::Rejected => "rejected",
        };
        write!(f, "line {}: {what}: {}", self.line, self.message)
    }
}

/// Column names for CSV input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvConfig {
    pub text: String,
    pub seed: String,
    pub label: String,
    pub embedding: String,
}

impl Default for CsvConfig {
    fn default() -> Self {
        CsvConfig {
            text: "text".into(),
            seed: "seed".into(),
            label: "label".into(),
            embedding: "embedding".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub diagnostics: Vec<Diagnostic>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" | "" => Some(false),
        _ => None,
    }
}

/// Parses a `;`-separated list of finite decimals.
pub fn parse_embedding(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(';')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("embedding component {part:?} is not a finite number"))
        })
        .collect()
}

fn format_embedding(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

struct DimCheck {
    first: Option<(u64, usize)>,
}

impl DimCheck {
    fn check(&mut self, line: u64, dim: usize) -> Result<()> {
        match self.first {
            None => {
                self.first = Some((line, dim));
                Ok(())
            }
            Some((first_line, first_dim)) if first_dim != dim => Err(Error::EmbeddingDims {
                first_line,
                first_dim,
                line,
                dim,
            }),
            Some(_) => Ok(()),
        }
    }
}

/// RFC 4180 CSV with a header row.
pub fn parse_csv(bytes: &[u8], config: &CsvConfig) -> Result<Parsed<Corpus>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let text_col = col(&config.text).ok_or_else(|| Error::MissingColumn(config.text.clone()))?;
    let (seed_col, label_col, emb_col) = (col(&config.seed), col(&config.label), col(&config.embedding));

    let mut examples = Vec::new();
    let mut diagnostics = Vec::new();
    let mut dims = DimCheck { first: None };
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let text = record.get(text_col).unwrap_or("");
        if text.trim().is_empty() {
            diagnostics.push(Diagnostic::reject(line, "empty text"));
            continue;
        }
        let mut raw = RawExample::new(examples.len(), text);
        if let Some(cell) = seed_col.and_then(|c| record.get(c)) {
            match parse_bool(cell) {
                Some(b) => raw.seed = b,
                None => diagnostics.push(Diagnostic::warn(
                    line,
                    format!("seed value {cell:?} is not a boolean; treated as false"),
                )),
            }
        }
        if let Some(cell) = label_col.and_then(|c| record.get(c)) {
            if !cell.trim().is_empty() {
                raw.label = Some(cell.to_string());
            }
        }
        if let Some(cell) = emb_col.and_then(|c| record.get(c)) {
            if !cell.trim().is_empty() {
                match parse_embedding(cell) {
                    Ok(v) => {
                        dims.check(line, v.len())?;
                        raw.embedding = Some(v);
                    }
                    Err(msg) => diagnostics.push(Diagnostic::warn(line, format!("{msg}; embedding ignored"))),
                }
            }
        }
        examples.push(raw);
    }
    if examples.len() < 2 {
        return Err(Error::TooFewExamples(examples.len()));
    }
    Ok(Parsed {
        value: Corpus {
            examples,
            source_kind: SourceKind::Csv,
        },
        diagnostics,
    })
}

/// Corpus read from CoNLL-U, carrying its annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedCorpus {
    pub corpus: Corpus,
    pub examples: Vec<AnnotatedExample>,
}

struct Block<'a> {
    first_line: u64,
    lines: Vec<(u64, &'a str)>,
}

fn blocks(src: &str) -> Vec<Block<'_>> {
    let mut out = Vec::new();
    let mut cur: Option<Block<'_>> = None;
    for (i, line) in src.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(b) = cur.take() {
                out.push(b);
            }
            continue;
        }
        cur.get_or_insert_with(|| Block {
            first_line: line_no,
            lines: Vec::new(),
        })
        .lines
        .push((line_no, line));
    }
    out.extend(cur);
    out
}

struct Sentence {
    text: Option<String>,
    seed: bool,
    label: Option<String>,
    embedding: Option<Vec<f64>>,
    embedding_line: u64,
    tokens: Vec<TokenAnnotation>,
    space_after: Vec<bool>,
}

fn parse_block(block: &Block<'_>, warnings: &mut Vec<Diagnostic>) -> std::result::Result<Sentence, Diagnostic> {
    let mut s = Sentence {
        text: None,
        seed: false,
        label: None,
        embedding: None,
        embedding_line: block.first_line,
        tokens: Vec::new(),
        space_after: Vec::new(),
    };
    let mut heads: Vec<(u64, Option<usize>)> = Vec::new();
    for &(line, content) in &block.lines {
        if let Some(comment) = content.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "text" => s.text = Some(value.to_string()),
                    "seed" => s.seed = parse_bool(value).unwrap_or(false),
                    "label" => s.label = Some(value.to_string()),
                    "embedding" => {
                        let v = parse_embedding(value).map_err(|m| Diagnostic::reject(line, m))?;
                        s.embedding = Some(v);
                        s.embedding_line = line;
                    }
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = content.split('\t').collect();
        if cols.len() != 10 {
            return Err(Diagnostic::reject(
                line,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let id: usize = id
            .parse()
            .map_err(|_| Diagnostic::reject(line, format!("bad token id {id:?}")))?;
        if id != s.tokens.len() + 1 {
            return Err(Diagnostic::reject(line, format!("token id {id} out of sequence")));
        }
        let pos = Tag::parse(cols[3]);
        if pos.upos().is_none() {
            warnings.push(Diagnostic::warn(
                line,
                format!("UPOS {:?} is not a Universal POS tag; kept as is", cols[3]),
            ));
        }
        let head = match cols[6] {
            "_" => (line, None),
            h => {
                let h: usize = h
                    .parse()
                    .map_err(|_| Diagnostic::reject(line, format!("bad HEAD {h:?}")))?;
                (line, Some(h))
            }
        };
        heads.push(head);
        let mut token = TokenAnnotation::new(cols[1], pos);
        token.deprel = (cols[7] != "_").then(|| cols[7].to_string());
        s.tokens.push(token);
        s.space_after.push(!cols[9].split('|').any(|m| m == "SpaceAfter=No"));
    }
    if s.tokens.is_empty() {
        return Err(Diagnostic::reject(block.first_line, "sentence has no tokens"));
    }
    let n = s.tokens.len();
    let mut roots = 0;
    for (i, (line, head)) in heads.into_iter().enumerate() {
        match head {
            None => {}
            Some(0) => roots += 1,
            Some(h) if h > n => {
                return Err(Diagnostic::reject(
                    line,
                    format!("HEAD {h} out of range for a {n}-token sentence"),
                ));
            }
            Some(h) if h - 1 == i => {
                return Err(Diagnostic::reject(line, "token is its own head"));
            }
            Some(h) => s.tokens[i].head = Some(h - 1),
        }
    }
    if roots > 1 {
        return Err(Diagnostic::reject(block.first_line, format!("{roots} root tokens")));
    }
    Ok(s)
}

fn text_from_forms(tokens: &[TokenAnnotation], space_after: &[bool]) -> String {
    let mut out = String::new();
    for (t, &space) in tokens.iter().zip(space_after) {
        out.push_str(&t.surface);
        if space {
            out.push(' ');
        }
    }
    out.trim_end().to_string()
}

/// Standard 10-column CoNLL-U. `# text`, `# seed`, `# label` and
/// `# embedding` comments are honored; multiword ranges and empty nodes
/// are skipped.
pub fn parse_conllu(bytes: &[u8]) -> Result<Parsed<AnnotatedCorpus>> {
    let src = std::str::from_utf8(bytes)?;
    let mut examples: Vec<AnnotatedExample> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut dims = DimCheck { first: None };
    for block in blocks(src) {
        let mut warnings = Vec::new();
        let sentence = match parse_block(&block, &mut warnings) {
            Ok(s) => s,
            Err(d) => {
                diagnostics.push(d);
                continue;
            }
        };
        diagnostics.extend(warnings);
        let text = sentence
            .text
            .clone()
            .unwrap_or_else(|| text_from_forms(&sentence.tokens, &sentence.space_after));
        if text.trim().is_empty() {
            diagnostics.push(Diagnostic::reject(block.first_line, "empty text"));
            continue;
        }
        if let Some(v) = &sentence.embedding {
            dims.check(sentence.embedding_line, v.len())?;
        }
        let raw = RawExample {
            id: examples.len(),
            text,
            seed: sentence.seed,
            embedding: sentence.embedding,
            label: sentence.label,
        };
        examples.push(AnnotatedExample::new(raw, sentence.tokens));
    }
    if examples.len() < 2 {
        return Err(Error::TooFewExamples(examples.len()));
    }
    let corpus = Corpus {
        examples: examples.iter().map(|e| e.raw.clone()).collect(),
        source_kind: SourceKind::Conllu,
    };
    Ok(Parsed {
        value: AnnotatedCorpus { corpus, examples },
        diagnostics,
    })
}

/// Serializes annotated examples as CoNLL-U. Unknown heads and deprels
/// are written as `_`.
pub fn write_conllu(examples: &[AnnotatedExample]) -> String {
    let mut out = String::new();
    for ex in examples {
        let _ = writeln!(out, "# sent_id = {}", ex.raw.id + 1);
        let _ = writeln!(out, "# text = {}", ex.raw.text);
        if ex.raw.seed {
            out.push_str("# seed = true\n");
        }
        if let Some(label) = &ex.raw.label {
            let _ = writeln!(out, "# label = {label}");
        }
        if let Some(v) = &ex.raw.embedding {
            let _ = writeln!(out, "# embedding = {}", format_embedding(v));
        }
        for (i, t) in ex.tokens.iter().enumerate() {
            let head = match (t.head, &t.deprel) {
                (Some(h), _) => (h + 1).to_string(),
                (None, Some(_)) => "0".to_string(),
                (None, None) => "_".to_string(),
            };
            let _ = writeln!(
                out,
                "{}\t{}\t_\t{}\t_\t_\t{}\t{}\t_\t_",
                i + 1,
                t.surface,
                t.pos,
                head,
                t.deprel.as_deref().unwrap_or("_"),
            );
        }
        out.push('\n');
    }
    out
}

/// Corpus ready for analysis, whichever format it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub source_kind: SourceKind,
    pub examples: Vec<AnnotatedExample>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Conllu,
}

impl Format {
    pub fn from_path(path: &std::path::Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "conllu" | "conll" => Some(Format::Conllu),
            _ => None,
        }
    }
}

/// Parses and, for CSV, annotates with the fallback tagger.
pub fn load(
    bytes: &[u8],
    format: Format,
    csv: &CsvConfig,
    lexicon: &synlens_core::annotate::Lexicon,
) -> Result<Loaded> {
    match format {
        Format::Csv => {
            let parsed = parse_csv(bytes, csv)?;
            let examples =
                synlens_core::annotate::annotate_corpus(lexicon, &parsed.value).map_err(Error::analysis("annotate"))?;
            Ok(Loaded {
                source_kind: SourceKind::Csv,
                examples,
                diagnostics: parsed.diagnostics,
            })
        }
        Format::Conllu => {
            let parsed = parse_conllu(bytes)?;
            Ok(Loaded {
                source_kind: SourceKind::Conllu,
                examples: parsed.value.examples,
                diagnostics: parsed.diagnostics,
            })
        }
    }
}
