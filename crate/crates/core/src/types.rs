//! Corpus and annotation types shared by every analysis stage.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// The 17 Universal POS tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl Upos {
    pub const ALL: [Upos; 17] = [
        Upos::Adj,
        Upos::Adp,
        Upos::Adv,
        Upos::Aux,
        Upos::Cconj,
        Upos::Det,
        Upos::Intj,
        Upos::Noun,
        Upos::Num,
        Upos::Part,
        Upos::Pron,
        Upos::Propn,
        Upos::Punct,
        Upos::Sconj,
        Upos::Sym,
        Upos::Verb,
        Upos::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Upos::Adj => "ADJ",
            Upos::Adp => "ADP",
            Upos::Adv => "ADV",
            Upos::Aux => "AUX",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Intj => "INTJ",
            Upos::Noun => "NOUN",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Pron => "PRON",
            Upos::Propn => "PROPN",
            Upos::Punct => "PUNCT",
            Upos::Sconj => "SCONJ",
            Upos::Sym => "SYM",
            Upos::Verb => "VERB",
            Upos::X => "X",
        }
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a Universal POS tag: {0:?}")]
pub struct UnknownUpos(pub String);

impl FromStr for Upos {
    type Err = UnknownUpos;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Upos::ALL
            .iter()
            .copied()
            .find(|u| u.as_str() == s)
            .ok_or_else(|| UnknownUpos(s.into()))
    }
}

/// A POS tag as carried by a token.
///
/// Tags outside the UPOS inventory can only arrive through CoNLL-U input;
/// they are kept verbatim so a round trip does not lose them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Upos(Upos),
    Other(Box<str>),
}

impl Tag {
    pub fn parse(s: &str) -> Tag {
        match s.parse::<Upos>() {
            Ok(u) => Tag::Upos(u),
            Err(_) => Tag::Other(s.into()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Tag::Upos(u) => u.as_str(),
            Tag::Other(s) => s,
        }
    }

    pub fn upos(&self) -> Option<Upos> {
        match self {
            Tag::Upos(u) => Some(*u),
            Tag::Other(_) => None,
        }
    }
}

impl From<Upos> for Tag {
    fn from(u: Upos) -> Self {
        Tag::Upos(u)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(feature = "serde")]
impl Serialize for Tag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[cfg(feature = "serde")]
impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Tag::parse(&s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum SourceKind {
    Csv,
    Conllu,
}

/// One input example before annotation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RawExample {
    pub id: usize,
    pub text: String,
    pub seed: bool,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub embedding: Option<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub label: Option<String>,
}

impl RawExample {
    pub fn new(id: usize, text: impl Into<String>) -> Self {
        RawExample {
            id,
            text: text.into(),
            seed: false,
            embedding: None,
            label: None,
        }
    }
}

/// Examples in input order, ids `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub examples: Vec<RawExample>,
    pub source_kind: SourceKind,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenAnnotation {
    pub surface: String,
    pub pos: Tag,
    /// Zero-based head index. `None` with a deprel present marks the root.
    pub head: Option<usize>,
    pub deprel: Option<String>,
}

impl TokenAnnotation {
    pub fn new(surface: impl Into<String>, pos: impl Into<Tag>) -> Self {
        TokenAnnotation {
            surface: surface.into(),
            pos: pos.into(),
            head: None,
            deprel: None,
        }
    }

    pub fn is_root(&self) -> bool {
        self.head.is_none() && self.deprel.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedExample {
    pub raw: RawExample,
    pub tokens: Vec<TokenAnnotation>,
    pub has_dependencies: bool,
}

impl AnnotatedExample {
    /// Builds an example and derives `has_dependencies` from the tokens.
    pub fn new(raw: RawExample, tokens: Vec<TokenAnnotation>) -> Self {
        let has_dependencies = dependencies_complete(&tokens);
        AnnotatedExample {
            raw,
            tokens,
            has_dependencies,
        }
    }

    pub fn id(&self) -> usize {
        self.raw.id
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// True when every token carries a deprel, heads stay in range and never
/// point at themselves, and exactly one token is the root.
pub fn dependencies_complete(tokens: &[TokenAnnotation]) -> bool {
    if tokens.is_empty() {
        return false;
    }
    let mut roots = 0;
    for (i, t) in tokens.iter().enumerate() {
        if t.deprel.is_none() {
            return false;
        }
        match t.head {
            None => roots += 1,
            Some(h) if h >= tokens.len() || h == i => return false,
            Some(_) => {}
        }
    }
    roots == 1
}
