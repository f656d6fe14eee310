//! Sentiment trajectories.
//!
//! Raw lyrics are tokenised without any sentence segmentation. Every
//! sentiment match is corrected by the valence shifters found in a
//! token window around it, giving a sparse per-token vector. That vector
//! is low-pass filtered with a DCT-II and resampled to a fixed number of
//! narrative-time bins.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{SentimentLexicon, ShifterClass, ShifterLexicon};

pub const DEFAULT_WINDOW: usize = 3;
pub const DEFAULT_OUT_LEN: usize = 100;
pub const DEFAULT_LOW_PASS: usize = 5;
/// Lyrics shorter than this are not turned into trajectories.
pub const MIN_TOKENS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("text is empty after cleaning")]
    EmptyText,
    #[error("window must be at least 1")]
    ZeroWindow,
    #[error("vector is empty")]
    EmptyVector,
    #[error("vector length {len} is shorter than low_pass {low_pass}")]
    TooShort { len: usize, low_pass: usize },
    #[error("invalid transform parameters: low_pass={low_pass}, out_len={out_len}")]
    BadTransform { low_pass: usize, out_len: usize },
    #[error("bin range {lo}..{hi} is outside 0 < lo <= hi <= 100")]
    BinRange { lo: f64, hi: f64 },
    #[error("token count must be at least 1")]
    NoTokens,
}

/// Lowercased tokens of one text, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub source_id: String,
    pub tokens: Vec<String>,
}

impl TokenStream {
    pub fn from_text(
        source_id: impl Into<String>,
        raw_text: &str,
    ) -> Result<Self, TrajectoryError> {
        Ok(Self {
            source_id: source_id.into(),
            tokens: tokenize(raw_text)?,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Drops `[...]` annotations, lowercases, splits on whitespace and trims
/// non-alphanumeric characters from both ends of each token. Apostrophes
/// and hyphens inside a word survive.
pub fn tokenize(raw_text: &str) -> Result<Vec<String>, TrajectoryError> {
    let mut cleaned = String::with_capacity(raw_text.len());
    let mut depth = 0usize;
    for ch in raw_text.chars() {
        match ch {
            '[' => {
                depth += 1;
                cleaned.push(' ');
            }
            ']' if depth > 0 => depth -= 1,
            _ if depth > 0 => {}
            '\u{2019}' | '\u{2018}' => cleaned.push('\''),
            _ => cleaned.push(ch),
        }
    }
    let tokens: Vec<String> = cleaned
        .split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        Err(TrajectoryError::EmptyText)
    } else {
        Ok(tokens)
    }
}

/// Weights of the valence-shifter correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValenceConfig {
    /// Tokens inspected on each side of a sentiment match.
    pub window: usize,
    pub amplifier_weight: f64,
    pub deamplifier_weight: f64,
    pub adversative_weight: f64,
    pub min_factor: f64,
    pub max_factor: f64,
}

impl Default for ValenceConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            amplifier_weight: 0.8,
            deamplifier_weight: 0.8,
            adversative_weight: 0.25,
            min_factor: 0.1,
            max_factor: 3.0,
        }
    }
}

/// Shifters counted around one sentiment match.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ShifterCounts {
    /// Negators before the match.
    pub negators: usize,
    /// Amplifiers on either side.
    pub amplifiers: usize,
    /// De-amplifiers on either side.
    pub deamplifiers: usize,
    /// Adversatives before the match.
    pub adversatives: usize,
}

impl ValenceConfig {
    /// Signed multiplier applied to a base polarity.
    pub fn factor(&self, c: ShifterCounts) -> f64 {
        let intensity = 1.0 + self.amplifier_weight * c.amplifiers as f64
            - self.deamplifier_weight * c.deamplifiers as f64
            - self.adversative_weight * c.adversatives as f64;
        let sign = if c.negators.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        sign * intensity.clamp(self.min_factor, self.max_factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentMatch {
    /// Index of the first matched token.
    pub start: usize,
    /// Number of tokens in the matched key.
    pub len: usize,
    pub base: f64,
    pub counts: ShifterCounts,
    pub corrected: f64,
}

/// Finds sentiment keys longest-first, left to right, without overlap,
/// and applies the shifter correction to each.
pub fn find_matches(
    tokens: &[String],
    lexicon: &SentimentLexicon,
    shifters: &ShifterLexicon,
    cfg: &ValenceConfig,
) -> Result<Vec<SentimentMatch>, TrajectoryError> {
    if cfg.window == 0 {
        return Err(TrajectoryError::ZeroWindow);
    }
    let max_n = lexicon.max_key_tokens().min(crate::lexicon::MAX_KEY_TOKENS);
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = max_n.min(tokens.len() - i);
        let hit = (1..=longest).rev().find_map(|n| {
            let key = tokens[i..i + n].join(" ");
            lexicon.lookup_normalized(&key).map(|v| (n, v))
        });
        match hit {
            Some((n, base)) => {
                let counts = count_shifters(tokens, shifters, i, i + n, cfg.window);
                out.push(SentimentMatch {
                    start: i,
                    len: n,
                    base,
                    counts,
                    corrected: base * cfg.factor(counts),
                });
                i += n;
            }
            None => i += 1,
        }
    }
    Ok(out)
}

// The match occupies [start, end). The window is clipped at the text edges.
fn count_shifters(
    tokens: &[String],
    shifters: &ShifterLexicon,
    start: usize,
    end: usize,
    window: usize,
) -> ShifterCounts {
    let mut c = ShifterCounts::default();
    let before = start.saturating_sub(window)..start;
    let after = end..(end + window).min(tokens.len());
    for (pos, preceding) in before.map(|p| (p, true)).chain(after.map(|p| (p, false))) {
        match shifters.class_of(&tokens[pos]) {
            Some(ShifterClass::Negator) if preceding => c.negators += 1,
            Some(ShifterClass::Adversative) if preceding => c.adversatives += 1,
            Some(ShifterClass::Amplifier) => c.amplifiers += 1,
            Some(ShifterClass::Deamplifier) => c.deamplifiers += 1,
            _ => {}
        }
    }
    c
}

/// Per-token corrected sentiment; zero where nothing matched.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSentimentVector {
    pub values: Vec<f64>,
}

impl SparseSentimentVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

pub fn extract_sparse(
    tokens: &[String],
    lexicon: &SentimentLexicon,
    shifters: &ShifterLexicon,
    cfg: &ValenceConfig,
) -> Result<SparseSentimentVector, TrajectoryError> {
    let mut values = vec![0.0; tokens.len()];
    for m in find_matches(tokens, lexicon, shifters, cfg)? {
        values[m.start] = m.corrected;
    }
    Ok(SparseSentimentVector { values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DctConfig {
    pub out_len: usize,
    pub low_pass: usize,
}

impl Default for DctConfig {
    fn default() -> Self {
        Self {
            out_len: DEFAULT_OUT_LEN,
            low_pass: DEFAULT_LOW_PASS,
        }
    }
}

/// Keeps the first `low_pass` DCT-II coefficients of `values` and
/// evaluates the inverse transform at `out_len` evenly spaced bin
/// midpoints. The output is on the same scale as the input.
pub fn dct_resample(values: &[f64], cfg: DctConfig) -> Result<Vec<f64>, TrajectoryError> {
    let len = values.len();
    if len == 0 {
        return Err(TrajectoryError::EmptyVector);
    }
    if cfg.low_pass == 0 || cfg.out_len < 2 {
        return Err(TrajectoryError::BadTransform {
            low_pass: cfg.low_pass,
            out_len: cfg.out_len,
        });
    }
    if len < cfg.low_pass {
        return Err(TrajectoryError::TooShort {
            len,
            low_pass: cfg.low_pass,
        });
    }

    let n = len as f64;
    // X_k = sum_j x_j cos(pi k (j + 1/2) / L)
    let coeffs: Vec<f64> = (0..cfg.low_pass)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(j, x)| x * (PI * k as f64 * (j as f64 + 0.5) / n).cos())
                .sum()
        })
        .collect();

    let m = cfg.out_len as f64;
    let out = (0..cfg.out_len)
        .map(|b| {
            let phase = PI * (b as f64 + 0.5) / m;
            let tail: f64 = coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * (phase * k as f64).cos())
                .sum();
            (coeffs[0] + 2.0 * tail) / n
        })
        .collect();
    Ok(out)
}

/// A sentiment curve over standardised narrative time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub source_id: String,
    pub lexicon: String,
    pub bins: Vec<f64>,
}

pub fn dct_standardize(
    source_id: impl Into<String>,
    lexicon: impl Into<String>,
    v: &SparseSentimentVector,
    cfg: DctConfig,
) -> Result<Trajectory, TrajectoryError> {
    Ok(Trajectory {
        source_id: source_id.into(),
        lexicon: lexicon.into(),
        bins: dct_resample(&v.values, cfg)?,
    })
}

/// Maps a percent range of narrative time back to word positions,
/// rounding half up.
pub fn bin_to_word_range(
    bin_lo: f64,
    bin_hi: f64,
    len: usize,
) -> Result<(usize, usize), TrajectoryError> {
    if !(bin_lo > 0.0 && bin_lo <= bin_hi && bin_hi <= 100.0) {
        return Err(TrajectoryError::BinRange {
            lo: bin_lo,
            hi: bin_hi,
        });
    }
    if len == 0 {
        return Err(TrajectoryError::NoTokens);
    }
    let to_word = |pct: f64| (pct * len as f64 / 100.0 + 0.5).floor() as usize;
    Ok((to_word(bin_lo), to_word(bin_hi)))
}

/// Why a text produced no trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SkipReason {
    EmptyText,
    TooFewTokens { tokens: usize, minimum: usize },
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::EmptyText => f.write_str("no tokens after cleaning"),
            Self::TooFewTokens { tokens, minimum } => {
                write!(f, "{tokens} tokens, fewer than the minimum of {minimum}")
            }
        }
    }
}

/// Runs tokenisation, shifter correction and resampling for one lexicon.
#[derive(Debug, Clone)]
pub struct TrajectoryExtractor<'a> {
    pub lexicon: &'a SentimentLexicon,
    pub shifters: &'a ShifterLexicon,
    pub valence: ValenceConfig,
    pub dct: DctConfig,
    pub min_tokens: usize,
}

impl<'a> TrajectoryExtractor<'a> {
    pub fn new(lexicon: &'a SentimentLexicon, shifters: &'a ShifterLexicon) -> Self {
        Self {
            lexicon,
            shifters,
            valence: ValenceConfig::default(),
            dct: DctConfig::default(),
            min_tokens: MIN_TOKENS,
        }
    }

    pub fn extract(&self, source_id: &str, raw_text: &str) -> Result<Trajectory, SkipReason> {
        let tokens = tokenize(raw_text).map_err(|_| SkipReason::EmptyText)?;
        let minimum = self.min_tokens.max(self.dct.low_pass);
        if tokens.len() < minimum {
            return Err(SkipReason::TooFewTokens {
                tokens: tokens.len(),
                minimum,
            });
        }
        let sparse = extract_sparse(&tokens, self.lexicon, self.shifters, &self.valence)
            .expect("window validated by config");
        Ok(
            dct_standardize(source_id, self.lexicon.name(), &sparse, self.dct)
                .expect("length checked above"),
        )
    }
}
