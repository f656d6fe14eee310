//! Lyrics corpus ingestion, engagement rates and descriptive statistics.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trajectory::tokenize;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.576;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Invalid { line: usize, reason: String },
    #[error("need at least 2 values, got {0}")]
    InsufficientData(usize),
    #[error("{0}")]
    EmptyInput(&'static str),
    #[error("unknown corpus format {0:?} (expected jsonl or csv)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses from a file extension; `.csv` is CSV, everything else JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            _ => Err(CorpusError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VideoMetadata {
    pub views: u64,
    pub likes: u64,
    pub dislikes: u64,
    pub comments: u64,
    pub days_active: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyricRecord {
    pub id: String,
    pub artist: String,
    pub title: String,
    pub raw_text: String,
    pub metadata: Option<VideoMetadata>,
}

/// Counts normalised to a 100-day exposure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateMetrics {
    pub views_per_100d: f64,
    pub likes_per_100d: f64,
    pub dislikes_per_100d: f64,
    pub comments_per_100d: f64,
    /// likes + dislikes + comments, all per 100 days.
    pub engagement: f64,
}

pub fn compute_rates(m: &VideoMetadata) -> RateMetrics {
    let per100 = |c: u64| c as f64 / m.days_active * 100.0;
    let likes = per100(m.likes);
    let dislikes = per100(m.dislikes);
    let comments = per100(m.comments);
    RateMetrics {
        views_per_100d: per100(m.views),
        likes_per_100d: likes,
        dislikes_per_100d: dislikes,
        comments_per_100d: comments,
        engagement: likes + dislikes + comments,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    /// The record was dropped.
    Skipped,
    /// The record was kept but is excluded from rate analyses.
    NoRates,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordIssue {
    pub line: usize,
    pub id: Option<String>,
    pub severity: Severity,
    pub reason: String,
}

impl fmt::Display for RecordIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}", self.line)?;
        if let Some(id) = &self.id {
            write!(f, " (id {id})")?;
        }
        write!(f, ": {}", self.reason)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub records: Vec<LyricRecord>,
    pub issues: Vec<RecordIssue>,
}

// Column layout shared by both input formats.
#[derive(Debug, Deserialize)]
struct RawRow {
    id: Option<String>,
    #[serde(default)]
    artist: Option<String>,
    #[serde(default)]
    title: Option<String>,
    lyrics: Option<String>,
    #[serde(default)]
    views: Option<f64>,
    #[serde(default)]
    likes: Option<f64>,
    #[serde(default)]
    dislikes: Option<f64>,
    #[serde(default)]
    comments: Option<f64>,
    #[serde(default)]
    days_active: Option<f64>,
    #[serde(default)]
    publish_date: Option<String>,
    #[serde(default)]
    retrieval_date: Option<String>,
}

enum RowOutcome {
    Record(LyricRecord, Option<String>),
    Reject(Option<String>, String),
}

fn count_field(name: &str, v: f64) -> Result<u64, String> {
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 {
        return Err(format!("{name} must be a non-negative integer, got {v}"));
    }
    Ok(v as u64)
}

fn parse_date(name: &str, s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|_| format!("{name} {s:?} is not a YYYY-MM-DD date"))
}

fn validate_row(row: RawRow) -> RowOutcome {
    let id = row
        .id
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    let Some(id) = id else {
        return RowOutcome::Reject(None, "missing id".into());
    };
    let lyrics = row.lyrics.unwrap_or_default();
    if lyrics.trim().is_empty() {
        return RowOutcome::Reject(Some(id), "empty lyrics".into());
    }

    let counts = [row.views, row.likes, row.dislikes, row.comments];
    let present = counts.iter().filter(|c| c.is_some()).count();
    let mut note = None;
    let metadata = if present == 0 && row.days_active.is_none() {
        None
    } else if present != 4 {
        return RowOutcome::Reject(
            Some(id),
            "views, likes, dislikes and comments must be given together".into(),
        );
    } else {
        let parsed: Result<Vec<u64>, String> = ["views", "likes", "dislikes", "comments"]
            .iter()
            .zip(counts)
            .map(|(name, v)| count_field(name, v.unwrap()))
            .collect();
        let parsed = match parsed {
            Ok(p) => p,
            Err(e) => return RowOutcome::Reject(Some(id), e),
        };
        let days = match (row.days_active, &row.publish_date, &row.retrieval_date) {
            (Some(d), _, _) => Some(d),
            (None, Some(p), Some(r)) => {
                match (
                    parse_date("publish_date", p),
                    parse_date("retrieval_date", r),
                ) {
                    (Ok(p), Ok(r)) => Some((r - p).num_days() as f64),
                    (Err(e), _) | (_, Err(e)) => return RowOutcome::Reject(Some(id), e),
                }
            }
            _ => None,
        };
        match days {
            Some(d) if !(d > 0.0 && d.is_finite()) => {
                return RowOutcome::Reject(
                    Some(id),
                    format!("days_active must be positive, got {d}"),
                )
            }
            Some(d) => Some(VideoMetadata {
                views: parsed[0],
                likes: parsed[1],
                dislikes: parsed[2],
                comments: parsed[3],
                days_active: d,
            }),
            None => {
                note = Some(
                    "no days_active and no publish/retrieval dates; excluded from rate analyses"
                        .into(),
                );
                None
            }
        }
    };

    RowOutcome::Record(
        LyricRecord {
            id,
            artist: row.artist.unwrap_or_default(),
            title: row.title.unwrap_or_default(),
            raw_text: lyrics,
            metadata,
        },
        note,
    )
}

struct Collector {
    strict: bool,
    seen: HashSet<String>,
    report: LoadReport,
}

impl Collector {
    fn push(
        &mut self,
        line: usize,
        outcome: Result<RowOutcome, String>,
    ) -> Result<(), CorpusError> {
        let (id, reason, severity, record) = match outcome {
            Err(reason) => (None, reason, Severity::Skipped, None),
            Ok(RowOutcome::Reject(id, reason)) => (id, reason, Severity::Skipped, None),
            Ok(RowOutcome::Record(rec, note)) => {
                if !self.seen.insert(rec.id.clone()) {
                    (
                        Some(rec.id.clone()),
                        format!("duplicate id {:?}", rec.id),
                        Severity::Skipped,
                        None,
                    )
                } else if let Some(note) = note {
                    (Some(rec.id.clone()), note, Severity::NoRates, Some(rec))
                } else {
                    self.report.records.push(rec);
                    return Ok(());
                }
            }
        };
        if self.strict && severity == Severity::Skipped {
            let reason = match &id {
                Some(id) => format!("record {id}: {reason}"),
                None => reason,
            };
            return Err(CorpusError::Invalid { line, reason });
        }
        self.report.issues.push(RecordIssue {
            line,
            id,
            severity,
            reason,
        });
        if let Some(rec) = record {
            self.report.records.push(rec);
        }
        Ok(())
    }
}

/// Parses and validates a corpus. Invalid rows are reported and skipped,
/// or abort the load when `strict` is set.
pub fn read_corpus<R: Read>(
    reader: R,
    format: CorpusFormat,
    strict: bool,
) -> Result<LoadReport, CorpusError> {
    let mut c = Collector {
        strict,
        seen: HashSet::new(),
        report: LoadReport::default(),
    };
    match format {
        CorpusFormat::Jsonl => {
            for (idx, line) in BufReader::new(reader).lines().enumerate() {
                let lineno = idx + 1;
                let line = line.map_err(|e| CorpusError::Invalid {
                    line: lineno,
                    reason: e.to_string(),
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                let outcome = serde_json::from_str::<RawRow>(&line)
                    .map(validate_row)
                    .map_err(|e| format!("malformed row: {e}"));
                c.push(lineno, outcome)?;
            }
        }
        CorpusFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .flexible(false)
                .from_reader(reader);
            let headers = rdr.headers().map_err(|e| CorpusError::Invalid {
                line: 1,
                reason: format!("bad header: {e}"),
            })?;
            for col in ["id", "lyrics"] {
                if !headers.iter().any(|h| h == col) {
                    return Err(CorpusError::Invalid {
                        line: 1,
                        reason: format!("header lacks column {col:?}"),
                    });
                }
            }
            let mut raw = csv::StringRecord::new();
            let headers = headers.clone();
            loop {
                match rdr.read_record(&mut raw) {
                    Ok(false) => break,
                    Ok(true) => {
                        let lineno = raw.position().map_or(0, |p| p.line() as usize);
                        let outcome = raw
                            .deserialize::<RawRow>(Some(&headers))
                            .map(validate_row)
                            .map_err(|e| format!("malformed row: {e}"));
                        c.push(lineno, outcome)?;
                    }
                    Err(e) => {
                        let lineno = e.position().map_or(0, |p| p.line() as usize);
                        c.push(lineno, Err(format!("malformed row: {e}")))?;
                    }
                }
            }
        }
    }
    Ok(c.report)
}

pub fn load_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    strict: bool,
) -> Result<LoadReport, CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_corpus(file, format, strict)
}

/// Mean, sample SD and normal 99% interval of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Descriptive {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci99_low: f64,
    pub ci99_high: f64,
}

pub fn describe(values: &[f64]) -> Result<Descriptive, CorpusError> {
    let n = values.len();
    if n < 2 {
        return Err(CorpusError::InsufficientData(n));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let sd = (ss / (nf - 1.0)).sqrt();
    let half = Z_99 * sd / nf.sqrt();
    Ok(Descriptive {
        n,
        mean,
        sd,
        ci99_low: mean - half,
        ci99_high: mean + half,
    })
}

/// Descriptives in the layout of a corpus summary table. Metadata rows
/// are `None` when fewer than two records carry metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub tokens: Descriptive,
    pub type_token_ratio: Descriptive,
    pub comments: Option<Descriptive>,
    pub likes: Option<Descriptive>,
    pub dislikes: Option<Descriptive>,
    pub days_active: Option<Descriptive>,
}

impl CorpusStats {
    pub fn rows(&self) -> Vec<(&'static str, Option<Descriptive>)> {
        vec![
            ("Tokens", Some(self.tokens)),
            ("Type-token ratio", Some(self.type_token_ratio)),
            ("Comments", self.comments),
            ("Likes", self.likes),
            ("Dislikes", self.dislikes),
            ("Days active", self.days_active),
        ]
    }
}

/// Token counts are taken after annotation stripping.
pub fn corpus_descriptives(corpus: &[LyricRecord]) -> Result<CorpusStats, CorpusError> {
    let token_lists: Vec<Vec<String>> = corpus
        .iter()
        .filter_map(|r| tokenize(&r.raw_text).ok())
        .collect();
    let lengths: Vec<f64> = token_lists.iter().map(|t| t.len() as f64).collect();
    let ttrs: Vec<f64> = token_lists
        .iter()
        .map(|t| type_token_ratio(t).expect("tokenize never returns an empty list"))
        .collect();
    let meta: Vec<&VideoMetadata> = corpus.iter().filter_map(|r| r.metadata.as_ref()).collect();
    let meta_stat = |f: fn(&VideoMetadata) -> f64| {
        let v: Vec<f64> = meta.iter().map(|m| f(m)).collect();
        describe(&v).ok()
    };
    Ok(CorpusStats {
        tokens: describe(&lengths)?,
        type_token_ratio: describe(&ttrs)?,
        comments: meta_stat(|m| m.comments as f64),
        likes: meta_stat(|m| m.likes as f64),
        dislikes: meta_stat(|m| m.dislikes as f64),
        days_active: meta_stat(|m| m.days_active),
    })
}

pub fn type_token_ratio<S: AsRef<str>>(tokens: &[S]) -> Result<f64, CorpusError> {
    if tokens.is_empty() {
        return Err(CorpusError::EmptyInput("token list is empty"));
    }
    let distinct: HashSet<String> = tokens.iter().map(|t| t.as_ref().to_lowercase()).collect();
    Ok(distinct.len() as f64 / tokens.len() as f64)
}

/// Share of tokens missing from `wordlist` (which holds lowercase words).
pub fn oov_rate<S: AsRef<str>>(
    tokens: &[S],
    wordlist: &HashSet<String>,
) -> Result<f64, CorpusError> {
    if tokens.is_empty() {
        return Err(CorpusError::EmptyInput("token list is empty"));
    }
    if wordlist.is_empty() {
        return Err(CorpusError::EmptyInput("wordlist is empty"));
    }
    let missing = tokens
        .iter()
        .filter(|t| !wordlist.contains(&t.as_ref().to_lowercase()))
        .count();
    Ok(missing as f64 / tokens.len() as f64)
}

pub fn load_wordlist(path: impl AsRef<Path>) -> Result<HashSet<String>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

/// Per-record id → metadata lookup.
pub fn metadata_by_id(corpus: &[LyricRecord]) -> HashMap<&str, &VideoMetadata> {
    corpus
        .iter()
        .filter_map(|r| r.metadata.as_ref().map(|m| (r.id.as_str(), m)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const THREE: &str = r#"{"id":"a","artist":"x","title":"t1","lyrics":"one two","views":10,"likes":1,"dislikes":0,"comments":2,"days_active":5}
{"id":"b","artist":"x","title":"t2","lyrics":"three four"}
{"id":"c","artist":"y","title":"t3","lyrics":"five","views":1,"likes":1,"dislikes":1,"comments":1,"publish_date":"2019-01-01","retrieval_date":"2019-03-02"}
"#;

    fn meta(views: u64, likes: u64, dislikes: u64, comments: u64, days: f64) -> VideoMetadata {
        VideoMetadata {
            views,
            likes,
            dislikes,
            comments,
            days_active: days,
        }
    }

    #[test]
    fn loads_well_formed_jsonl() {
        let rep = read_corpus(THREE.as_bytes(), CorpusFormat::Jsonl, true).unwrap();
        assert_eq!(rep.records.len(), 3);
        assert!(rep.issues.is_empty());
        assert!(rep.records[1].metadata.is_none());
        assert_eq!(rep.records[2].metadata.unwrap().days_active, 60.0);
    }

    #[test]
    fn loads_csv() {
        let csv = "id,artist,title,lyrics,views,likes,dislikes,comments,days_active\n\
                   a,x,t,\"hello, world\",10,1,0,2,5\n\
                   b,x,t,second,,,,,\n";
        let rep = read_corpus(csv.as_bytes(), CorpusFormat::Csv, true).unwrap();
        assert_eq!(rep.records.len(), 2);
        assert_eq!(rep.records[0].raw_text, "hello, world");
        assert_eq!(rep.records[0].metadata.unwrap().views, 10);
        assert!(rep.records[1].metadata.is_none());
    }

    #[test]
    fn zero_days_names_record() {
        let row = r#"{"id":"song-7","lyrics":"x","views":1,"likes":1,"dislikes":1,"comments":1,"days_active":0}"#;
        let err = read_corpus(row.as_bytes(), CorpusFormat::Jsonl, true).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("song-7") && msg.contains("days_active"),
            "{msg}"
        );

        let rep = read_corpus(row.as_bytes(), CorpusFormat::Jsonl, false).unwrap();
        assert!(rep.records.is_empty());
        assert_eq!(rep.issues[0].id.as_deref(), Some("song-7"));
        assert_eq!(rep.issues[0].line, 1);
    }

    #[test]
    fn duplicate_and_malformed_rows() {
        let text = "{\"id\":\"a\",\"lyrics\":\"x\"}\n{not json\n{\"id\":\"a\",\"lyrics\":\"y\"}\n";
        let rep = read_corpus(text.as_bytes(), CorpusFormat::Jsonl, false).unwrap();
        assert_eq!(rep.records.len(), 1);
        assert_eq!(rep.issues.len(), 2);
        assert_eq!(rep.issues[0].line, 2);
        assert!(rep.issues[1].reason.contains("duplicate"));
        assert!(read_corpus(text.as_bytes(), CorpusFormat::Jsonl, true).is_err());
    }

    #[test]
    fn partial_metadata_is_rejected() {
        let row = r#"{"id":"a","lyrics":"x","views":1}"#;
        assert!(read_corpus(row.as_bytes(), CorpusFormat::Jsonl, true).is_err());
        let row = r#"{"id":"a","lyrics":"x","views":1.5,"likes":1,"dislikes":1,"comments":1,"days_active":3}"#;
        assert!(read_corpus(row.as_bytes(), CorpusFormat::Jsonl, true).is_err());
    }

    #[test]
    fn counts_without_days_are_flagged_not_dropped() {
        let row = r#"{"id":"a","lyrics":"x","views":1,"likes":1,"dislikes":1,"comments":1}"#;
        let rep = read_corpus(row.as_bytes(), CorpusFormat::Jsonl, true).unwrap();
        assert_eq!(rep.records.len(), 1);
        assert!(rep.records[0].metadata.is_none());
        assert_eq!(rep.issues[0].severity, Severity::NoRates);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_corpus("/nonexistent/corpus.jsonl", CorpusFormat::Jsonl, false),
            Err(CorpusError::Io { .. })
        ));
    }

    #[test]
    fn rates() {
        let r = compute_rates(&meta(1000, 0, 0, 0, 200.0));
        assert_eq!(r.views_per_100d, 500.0);
        let r = compute_rates(&meta(0, 100, 10, 40, 100.0));
        assert_eq!(r.engagement, 150.0);
        let r = compute_rates(&meta(473_414, 0, 0, 0, 200.0));
        assert!((r.views_per_100d - 236_707.0).abs() < 1e-9);
    }

    #[test]
    fn describe_cases() {
        let d = describe(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(d.mean, 2.0);
        assert!((d.sd - 1.0).abs() < 1e-12);
        let half = 2.576 / 3f64.sqrt();
        assert!((d.ci99_low - (2.0 - half)).abs() < 1e-12);
        assert!((d.ci99_high - (2.0 + half)).abs() < 1e-12);

        let d = describe(&[4.5; 7]).unwrap();
        assert_eq!((d.sd, d.ci99_low, d.ci99_high), (0.0, 4.5, 4.5));

        assert!(matches!(
            describe(&[1.0]),
            Err(CorpusError::InsufficientData(1))
        ));
    }

    #[test]
    fn ttr_and_oov() {
        assert_eq!(type_token_ratio(&["a", "a", "b", "c"]).unwrap(), 0.75);
        assert_eq!(type_token_ratio(&["a", "A", "b", "c"]).unwrap(), 0.75);
        assert_eq!(type_token_ratio(&["x", "y", "z"]).unwrap(), 1.0);
        assert!(type_token_ratio::<&str>(&[]).is_err());

        let words: HashSet<String> = ["the", "and", "a", "to", "you"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(oov_rate(&["the", "And", "you"], &words).unwrap(), 0.0);
        assert_eq!(oov_rate(&["opp", "bando"], &words).unwrap(), 1.0);
        let ten = [
            "the", "and", "a", "to", "you", "the", "and", "opp", "ting", "peng",
        ];
        assert!((oov_rate(&ten, &words).unwrap() - 0.3).abs() < 1e-12);
        assert!(oov_rate::<&str>(&[], &words).is_err());
        assert!(oov_rate(&["a"], &HashSet::new()).is_err());
    }

    #[test]
    fn corpus_descriptives_counts_stripped_tokens() {
        let rep = read_corpus(THREE.as_bytes(), CorpusFormat::Jsonl, true).unwrap();
        let stats = corpus_descriptives(&rep.records).unwrap();
        assert_eq!(stats.tokens.n, 3);
        assert!((stats.tokens.mean - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(stats.likes.unwrap().n, 2);
        assert!(corpus_descriptives(&rep.records[..1]).is_err());
    }

    proptest! {
        #[test]
        fn rates_are_homogeneous(
            v in 0u64..100_000, l in 0u64..10_000, d in 0u64..1_000, c in 0u64..5_000,
            days in 1.0f64..2000.0, k in 1u64..20,
        ) {
            let a = compute_rates(&meta(v, l, d, c, days));
            let b = compute_rates(&meta(v * k, l * k, d * k, c * k, days));
            let kf = k as f64;
            prop_assert!((b.views_per_100d - kf * a.views_per_100d).abs() <= 1e-9 * b.views_per_100d.max(1.0));
            prop_assert!((b.engagement - kf * a.engagement).abs() <= 1e-9 * b.engagement.max(1.0));
            prop_assert_eq!(a.engagement, a.likes_per_100d + a.dislikes_per_100d + a.comments_per_100d);
        }

        #[test]
        fn order_does_not_matter(mut tokens in proptest::collection::vec("[a-d]{1,2}", 1..30), rot in 0usize..30) {
            let words: HashSet<String> = ["a", "b", "ab"].iter().map(|s| s.to_string()).collect();
            let ttr = type_token_ratio(&tokens).unwrap();
            let oov = oov_rate(&tokens, &words).unwrap();
            let r = rot % tokens.len();
            tokens.rotate_left(r);
            tokens.reverse();
            prop_assert_eq!(ttr, type_token_ratio(&tokens).unwrap());
            prop_assert_eq!(oov, oov_rate(&tokens, &words).unwrap());
        }

        #[test]
        fn ci_width_shrinks_with_sqrt_n(reps in 1usize..20) {
            let base = [1.0, 3.0, 2.0, 6.0];
            let small = describe(&base).unwrap();
            // repeating the sample keeps the sd close while n grows
            let big_v: Vec<f64> = base.iter().cycle().take(base.len() * (reps + 1)).copied().collect();
            let big = describe(&big_v).unwrap();
            let w_small = (small.ci99_high - small.ci99_low) / small.sd;
            let w_big = (big.ci99_high - big.ci99_low) / big.sd;
            let expected = (small.n as f64 / big.n as f64).sqrt();
            prop_assert!((w_big / w_small - expected).abs() < 1e-12);
        }
    }
}
