//! Run configuration: a flat `key = value` file whose keys can all be
//! overridden from the command line.

use std::path::{Path, PathBuf};

use lyricarc::clustering::DEFAULT_RESTARTS;
use lyricarc::corpus::CorpusFormat;
use lyricarc::stats::ResponseMode;
use lyricarc::trajectory::{DctConfig, ValenceConfig, MIN_TOKENS};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<CorpusFormat>,
    pub standard_lexicon: Option<PathBuf>,
    pub slang_lexicon: Option<PathBuf>,
    /// Shifter table; the bundled list is used when unset.
    pub shifters: Option<PathBuf>,
    pub wordlist: Option<PathBuf>,
    pub valence: ValenceConfig,
    pub dct: DctConfig,
    pub min_tokens: usize,
    /// Fixed cluster count; chosen by silhouette over `k_min..=k_max` when unset.
    pub k: Option<usize>,
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub restarts: usize,
    pub response_mode: ResponseMode,
    pub yates: bool,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            corpus_format: None,
            standard_lexicon: None,
            slang_lexicon: None,
            shifters: None,
            wordlist: None,
            valence: ValenceConfig::default(),
            dct: DctConfig::default(),
            min_tokens: MIN_TOKENS,
            k: None,
            k_min: 1,
            k_max: 10,
            seed: 1,
            restarts: DEFAULT_RESTARTS,
            response_mode: ResponseMode::Rounded,
            yates: true,
            out_dir: PathBuf::from("out"),
            strict: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "corpus",
    "corpus_format",
    "standard_lexicon",
    "slang_lexicon",
    "shifters",
    "wordlist",
    "window",
    "amplifier_weight",
    "deamplifier_weight",
    "adversative_weight",
    "min_factor",
    "max_factor",
    "low_pass",
    "out_len",
    "min_tokens",
    "k",
    "k_min",
    "k_max",
    "seed",
    "restarts",
    "response_mode",
    "yates",
    "out_dir",
    "strict",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Validation(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Validation(format!(
            "invalid boolean {value:?} for {key}"
        ))),
    }
}

impl RunConfig {
    /// Applies one setting. Relative paths are resolved against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), CliError> {
        let path = || base.join(value);
        match key {
            "corpus" => self.corpus = Some(path()),
            "corpus_format" => {
                self.corpus_format =
                    Some(value.parse().map_err(|e: lyricarc::corpus::CorpusError| {
                        CliError::Validation(e.to_string())
                    })?)
            }
            "standard_lexicon" => self.standard_lexicon = Some(path()),
            "slang_lexicon" => self.slang_lexicon = Some(path()),
            "shifters" => self.shifters = Some(path()),
            "wordlist" => self.wordlist = Some(path()),
            "window" => self.valence.window = parse(key, value)?,
            "amplifier_weight" => self.valence.amplifier_weight = parse(key, value)?,
            "deamplifier_weight" => self.valence.deamplifier_weight = parse(key, value)?,
            "adversative_weight" => self.valence.adversative_weight = parse(key, value)?,
            "min_factor" => self.valence.min_factor = parse(key, value)?,
            "max_factor" => self.valence.max_factor = parse(key, value)?,
            "low_pass" => self.dct.low_pass = parse(key, value)?,
            "out_len" => self.dct.out_len = parse(key, value)?,
            "min_tokens" => self.min_tokens = parse(key, value)?,
            "k" => {
                self.k = match value {
                    "" | "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "k_min" => self.k_min = parse(key, value)?,
            "k_max" => self.k_max = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "restarts" => self.restarts = parse(key, value)?,
            "response_mode" => {
                self.response_mode = match value {
                    "rounded" => ResponseMode::Rounded,
                    "offset" => ResponseMode::Offset,
                    _ => {
                        return Err(CliError::Validation(format!(
                            "response_mode must be rounded or offset, got {value:?}"
                        )))
                    }
                }
            }
            "yates" => self.yates = parse_bool(key, value)?,
            "out_dir" => self.out_dir = path(),
            "strict" => self.strict = parse_bool(key, value)?,
            _ => return Err(CliError::Validation(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Parses a config file body. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str, base: &Path) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Validation(format!("config line {}: expected key = value", i + 1))
            })?;
            self.set(key.trim(), value.trim(), base)
                .map_err(|e| CliError::Validation(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg = Self::default();
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.apply_text(&text, base)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.valence.window == 0 {
            return bad("window must be at least 1".into());
        }
        if self.valence.min_factor > self.valence.max_factor {
            return bad("min_factor exceeds max_factor".into());
        }
        if self.dct.low_pass == 0 || self.dct.out_len < 2 {
            return bad("low_pass must be >= 1 and out_len >= 2".into());
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return bad(format!("invalid k range {}..={}", self.k_min, self.k_max));
        }
        if self.k == Some(0) {
            return bad("k must be at least 1".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        Ok(())
    }

    pub fn require<'a>(&self, what: &str, p: &'a Option<PathBuf>) -> Result<&'a Path, CliError> {
        let p = p
            .as_deref()
            .ok_or_else(|| CliError::Validation(format!("{what} is not configured")))?;
        if !p.is_file() {
            return Err(CliError::Validation(format!(
                "{what} {} does not exist",
                p.display()
            )));
        }
        Ok(p)
    }
}
