//! Fallback tokenizer and part-of-speech tagger for raw-text corpora.
//!
//! The tagger is a closed-class lexicon plus a handful of suffix rules,
//! defaulting to `NOUN`. It is deterministic and good enough to expose
//! repeated grammatical shapes; it is not a statistical tagger and does
//! not produce dependency parses.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{AnnotatedExample, Corpus, SourceKind, TokenAnnotation, Upos};

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.tsv");

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'..='\u{201F}' | '\u{2026}' | '\u{2013}' | '\u{2014}' | '¡' | '¿' | '«' | '»'
        )
}

fn is_symbol(c: char) -> bool {
    matches!(
        c,
        '$' | '%' | '&' | '*' | '+' | '<' | '=' | '>' | '@' | '^' | '|' | '~' | '#' | '€' | '£'
    )
}

/// Splits on Unicode whitespace, then peels leading and trailing
/// punctuation off each word, one character per token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let chars: Vec<(usize, char)> = word.char_indices().collect();
        let lead = chars.iter().take_while(|(_, c)| is_punct(*c)).count();
        if lead == chars.len() {
            out.extend(chars.iter().map(|(_, c)| c.to_string()));
            continue;
        }
        let trail = chars.iter().rev().take_while(|(_, c)| is_punct(*c)).count();
        out.extend(chars[..lead].iter().map(|(_, c)| c.to_string()));
        let start = chars[lead].0;
        let end = if trail == 0 {
            word.len()
        } else {
            chars[chars.len() - trail].0
        };
        out.push(word[start..end].to_string());
        out.extend(chars[chars.len() - trail..].iter().map(|(_, c)| c.to_string()));
    }
    out
}

/// Lowercased word → UPOS lookup table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Upos>,
}

impl Lexicon {
    pub fn empty() -> Self {
        Lexicon::default()
    }

    /// The English lexicon bundled with the crate.
    pub fn english() -> Self {
        Lexicon::parse(DEFAULT_LEXICON).expect("bundled lexicon is well-formed")
    }

    /// Parses `token<TAB>UPOS` lines. Blank lines and `#` comments are skipped.
    /// Later entries override earlier ones.
    pub fn parse(src: &str) -> Result<Self> {
        let mut lex = Lexicon::empty();
        lex.extend_from_str(src)?;
        Ok(lex)
    }

    pub fn extend_from_str(&mut self, src: &str) -> Result<()> {
        for (i, line) in src.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| Error::Lexicon {
                line: i + 1,
                message: "expected token<TAB>UPOS".into(),
            })?;
            let tag = tag.trim().parse::<Upos>().map_err(|e| Error::Lexicon {
                line: i + 1,
                message: e.to_string(),
            })?;
            self.entries.insert(word.trim().to_lowercase(), tag);
        }
        Ok(())
    }

    pub fn insert(&mut self, word: &str, tag: Upos) {
        self.entries.insert(word.to_lowercase(), tag);
    }

    pub fn get(&self, word: &str) -> Option<Upos> {
        self.entries.get(&word.to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn numeric_tag(word: &str) -> Option<Upos> {
    let lower = word.to_lowercase();
    if !lower.starts_with(|c: char| c.is_ascii_digit()) {
        return None;
    }
    let digits_end = lower
        .find(|c: char| !(c.is_ascii_digit() || c == ',' || c == '.' || c == ':'))
        .unwrap_or(lower.len());
    match &lower[digits_end..] {
        "" | "s" | "'s" | "k" | "m" | "am" | "pm" => Some(Upos::Num),
        "st" | "nd" | "rd" | "th" => Some(Upos::Adj),
        _ => None,
    }
}

const SUFFIX_RULES: &[(&str, Upos)] = &[
    ("ly", Upos::Adv),
    ("ing", Upos::Verb),
    ("ed", Upos::Verb),
    ("ize", Upos::Verb),
    ("ise", Upos::Verb),
    ("ous", Upos::Adj),
    ("ful", Upos::Adj),
    ("ive", Upos::Adj),
    ("able", Upos::Adj),
    ("ible", Upos::Adj),
    ("less", Upos::Adj),
    ("ical", Upos::Adj),
];

fn tag_one(lexicon: &Lexicon, word: &str, sentence_initial: bool) -> Upos {
    if word.chars().all(is_punct) {
        return if word.chars().all(is_symbol) {
            Upos::Sym
        } else {
            Upos::Punct
        };
    }
    if let Some(t) = numeric_tag(word) {
        return t;
    }
    if let Some(t) = lexicon.get(word) {
        return t;
    }
    let mut chars = word.chars();
    let first_upper = chars.next().is_some_and(char::is_uppercase);
    if first_upper && !sentence_initial {
        return Upos::Propn;
    }
    let lower = word.to_lowercase();
    if lower.chars().count() > 4 {
        for (suffix, tag) in SUFFIX_RULES {
            if lower.ends_with(suffix) {
                return *tag;
            }
        }
    }
    Upos::Noun
}

const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "we", "they"];

/// One UPOS tag per token. Pure and deterministic.
///
/// After the per-word pass, two contextual fixes apply: infinitival "to"
/// before a verb is `PART`, and "like" right after a subject pronoun or a
/// negated auxiliary is `VERB`.
pub fn tag_pos(lexicon: &Lexicon, tokens: &[String]) -> Vec<Upos> {
    let mut tags: Vec<Upos> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| tag_one(lexicon, t, i == 0))
        .collect();
    for i in 0..tokens.len() {
        let word = tokens[i].to_lowercase();
        if word == "to" && tags.get(i + 1) == Some(&Upos::Verb) {
            tags[i] = Upos::Part;
        }
        if word == "like" && i > 0 {
            let prev = tokens[i - 1].to_lowercase();
            if SUBJECT_PRONOUNS.contains(&prev.as_str()) || (tags[i - 1] == Upos::Aux && prev.ends_with("n't")) {
                tags[i] = Upos::Verb;
            }
        }
    }
    tags
}

/// Tokenizes and tags one example. No dependency annotations are produced.
pub fn annotate_example(lexicon: &Lexicon, raw: &crate::types::RawExample) -> AnnotatedExample {
    let surfaces = tokenize(&raw.text);
    let tags = tag_pos(lexicon, &surfaces);
    let tokens = surfaces
        .into_iter()
        .zip(tags)
        .map(|(s, t)| TokenAnnotation::new(s, t))
        .collect();
    AnnotatedExample {
        raw: raw.clone(),
        tokens,
        has_dependencies: false,
    }
}

/// Annotates a raw-text corpus. CoNLL-U corpora arrive annotated and are
/// refused here.
pub fn annotate_corpus(lexicon: &Lexicon, corpus: &Corpus) -> Result<Vec<AnnotatedExample>> {
    if corpus.source_kind != SourceKind::Csv {
        return Err(Error::AlreadyAnnotated);
    }
    Ok(corpus
        .examples
        .iter()
        .map(|raw| annotate_example(lexicon, raw))
        .collect())
}
