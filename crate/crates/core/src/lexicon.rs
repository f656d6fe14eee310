//! Sentiment and valence-shifter lexicons.
//!
//! A [`SentimentLexicon`] maps short lowercase keys (one to three tokens)
//! to a polarity on whatever scale the source table uses. Values are kept
//! exactly as loaded. A [`ShifterLexicon`] maps single tokens to the kind
//! of valence shift they apply to nearby sentiment terms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longest supported sentiment key, in tokens.
pub const MAX_KEY_TOKENS: usize = 3;

const DEFAULT_SHIFTERS: &str = include_str!("../data/shifters.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate terms: {}", .0.join(", "))]
    DuplicateTerms(Vec<String>),
    #[error("lexicon is empty")]
    Empty,
}

/// Normalises a lexicon key or query: lowercase, single-space separated.
fn normalize_key(term: &str) -> String {
    term.split_whitespace()
        .map(|t| t.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    name: String,
    entries: HashMap<String, f64>,
    max_key_tokens: usize,
}

impl SentimentLexicon {
    pub fn from_entries<I, S>(name: impl Into<String>, entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut map = HashMap::new();
        let mut dups = BTreeSet::new();
        for (i, (term, value)) in entries.into_iter().enumerate() {
            let key = normalize_key(term.as_ref());
            check_key(&key, value, i + 1)?;
            if map.insert(key.clone(), value).is_some() {
                dups.insert(key);
            }
        }
        Self::finish(name.into(), map, dups)
    }

    /// Reads a `term<TAB>value` table without a header.
    pub fn from_reader<R: Read>(name: impl Into<String>, reader: R) -> Result<Self, LexiconError> {
        let mut map = HashMap::new();
        let mut dups = BTreeSet::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| LexiconError::Parse {
                line: lineno,
                reason: e.to_string(),
            })?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (term, value) = line.split_once('\t').ok_or_else(|| LexiconError::Parse {
                line: lineno,
                reason: "expected `term<TAB>value`".into(),
            })?;
            let value: f64 = value.trim().parse().map_err(|_| LexiconError::Parse {
                line: lineno,
                reason: format!("non-numeric value {:?}", value.trim()),
            })?;
            let key = normalize_key(term);
            check_key(&key, value, lineno)?;
            if map.insert(key.clone(), value).is_some() {
                dups.insert(key);
            }
        }
        Self::finish(name.into(), map, dups)
    }

    pub fn load(name: impl Into<String>, path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(name, file)
    }

    fn finish(
        name: String,
        entries: HashMap<String, f64>,
        dups: BTreeSet<String>,
    ) -> Result<Self, LexiconError> {
        if !dups.is_empty() {
            return Err(LexiconError::DuplicateTerms(dups.into_iter().collect()));
        }
        if entries.is_empty() {
            return Err(LexiconError::Empty);
        }
        let max_key_tokens = entries
            .keys()
            .map(|k| k.split(' ').count())
            .max()
            .unwrap_or(1);
        Ok(Self {
            name,
            entries,
            max_key_tokens,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of tokens in the longest key.
    pub fn max_key_tokens(&self) -> usize {
        self.max_key_tokens
    }

    /// Case-insensitive exact key lookup.
    pub fn lookup(&self, term: &str) -> Option<f64> {
        self.entries.get(&normalize_key(term)).copied()
    }

    /// Lookup for an already normalised key (hot path during extraction).
    pub(crate) fn lookup_normalized(&self, key: &str) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

fn check_key(key: &str, value: f64, line: usize) -> Result<(), LexiconError> {
    if key.is_empty() {
        return Err(LexiconError::Parse {
            line,
            reason: "empty term".into(),
        });
    }
    let n = key.split(' ').count();
    if n > MAX_KEY_TOKENS {
        return Err(LexiconError::Parse {
            line,
            reason: format!("term {key:?} has {n} tokens (max {MAX_KEY_TOKENS})"),
        });
    }
    if !value.is_finite() {
        return Err(LexiconError::Parse {
            line,
            reason: format!("non-finite value for {key:?}"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapEntry {
    pub term: String,
    pub a: f64,
    pub b: f64,
}

/// Partition of the union of two lexicons' key sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LexiconDiff {
    pub only_a: Vec<String>,
    pub only_b: Vec<String>,
    pub overlap: Vec<OverlapEntry>,
}

impl LexiconDiff {
    /// Overlapping terms whose values differ.
    pub fn disagreements(&self) -> impl Iterator<Item = &OverlapEntry> {
        self.overlap.iter().filter(|e| e.a != e.b)
    }
}

pub fn lexicon_diff(a: &SentimentLexicon, b: &SentimentLexicon) -> LexiconDiff {
    let mut only_a = Vec::new();
    let mut overlap = Vec::new();
    for (term, &va) in &a.entries {
        match b.entries.get(term) {
            Some(&vb) => overlap.push(OverlapEntry {
                term: term.clone(),
                a: va,
                b: vb,
            }),
            None => only_a.push(term.clone()),
        }
    }
    let mut only_b: Vec<String> = b
        .entries
        .keys()
        .filter(|t| !a.entries.contains_key(*t))
        .cloned()
        .collect();
    only_a.sort();
    only_b.sort();
    overlap.sort_by(|x, y| x.term.cmp(&y.term));
    LexiconDiff {
        only_a,
        only_b,
        overlap,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShifterClass {
    Negator,
    Amplifier,
    Deamplifier,
    Adversative,
}

impl FromStr for ShifterClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "negator" => Ok(Self::Negator),
            "amplifier" => Ok(Self::Amplifier),
            "deamplifier" | "de-amplifier" => Ok(Self::Deamplifier),
            "adversative" => Ok(Self::Adversative),
            other => Err(format!("unknown shifter class {other:?}")),
        }
    }
}

impl fmt::Display for ShifterClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Negator => "negator",
            Self::Amplifier => "amplifier",
            Self::Deamplifier => "deamplifier",
            Self::Adversative => "adversative",
        })
    }
}

/// Single-token valence shifters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShifterLexicon {
    entries: HashMap<String, ShifterClass>,
}

impl ShifterLexicon {
    pub fn from_entries<I, S>(entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (S, ShifterClass)>,
        S: AsRef<str>,
    {
        let mut map = HashMap::new();
        let mut dups = BTreeSet::new();
        for (i, (term, class)) in entries.into_iter().enumerate() {
            let key = shifter_key(term.as_ref(), i + 1)?;
            if map.insert(key.clone(), class).is_some() {
                dups.insert(key);
            }
        }
        if !dups.is_empty() {
            return Err(LexiconError::DuplicateTerms(dups.into_iter().collect()));
        }
        Ok(Self { entries: map })
    }

    /// Reads a `term<TAB>class` table without a header.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, LexiconError> {
        let mut rows = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| LexiconError::Parse {
                line: lineno,
                reason: e.to_string(),
            })?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (term, class) = line.split_once('\t').ok_or_else(|| LexiconError::Parse {
                line: lineno,
                reason: "expected `term<TAB>class`".into(),
            })?;
            let class = class
                .parse::<ShifterClass>()
                .map_err(|reason| LexiconError::Parse {
                    line: lineno,
                    reason,
                })?;
            shifter_key(term, lineno)?;
            rows.push((term.to_string(), class));
        }
        Self::from_entries(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file)
    }

    /// The bundled English shifter list.
    pub fn bundled() -> Self {
        Self::from_reader(DEFAULT_SHIFTERS.as_bytes()).expect("bundled shifter table is valid")
    }

    pub fn class_of(&self, token: &str) -> Option<ShifterClass> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn shifter_key(term: &str, line: usize) -> Result<String, LexiconError> {
    let key = normalize_key(term);
    if key.is_empty() || key.contains(' ') {
        return Err(LexiconError::Parse {
            line,
            reason: format!("shifter term {term:?} must be a single token"),
        });
    }
    Ok(key)
}
