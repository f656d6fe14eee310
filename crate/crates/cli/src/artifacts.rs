//! Reading and writing pipeline artifacts.
//!
//! CSV files open with a `#` comment naming the tool version and, where
//! relevant, the lexicon and seed. Floats are written in shortest
//! round-trip form so reruns are byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use lyricarc::clustering::AggregateShape;
use lyricarc::trajectory::Trajectory;
use lyricarc::TOOL_VERSION;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const CORPUS_SUMMARY: &str = "corpus_summary.json";
pub const SKIPPED: &str = "skipped.csv";
pub const ASSIGNMENTS: &str = "assignments.csv";
pub const CLUSTERS: &str = "clusters.json";
pub const STATS_JSON: &str = "stats.json";
pub const STATS_TXT: &str = "stats.txt";
pub const SUMMARY: &str = "summary.txt";
pub const MANIFEST: &str = "manifest.json";
pub const TIMINGS: &str = "timings.json";

pub fn trajectories_file(lexicon: &str) -> String {
    format!("trajectories_{lexicon}.csv")
}

pub fn diagnostics_file(lexicon: &str) -> String {
    format!("diagnostics_{lexicon}.csv")
}

pub fn shapes_file(lexicon: &str) -> String {
    format!("shapes_{lexicon}.csv")
}

pub fn plot_file(lexicon: &str, stat: &str) -> String {
    format!("shapes_{lexicon}_{stat}.svg")
}

pub fn header_comment(lexicon: Option<&str>, seed: Option<u64>) -> String {
    let mut s = format!("# tool={}", TOOL_VERSION.replace(' ', "/"));
    if let Some(l) = lexicon {
        s.push_str(&format!(" lexicon={l}"));
    }
    if let Some(seed) = seed {
        s.push_str(&format!(" seed={seed}"));
    }
    s.push('\n');
    s
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    s.push('\n');
    write_text(path, &s)
}

pub fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = fs::read_to_string(path).map_err(|_| missing(path))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn missing(path: &Path) -> CliError {
    let stage = match path.file_name().and_then(|f| f.to_str()).unwrap_or("") {
        f if f.starts_with("trajectories_") => "extract",
        CORPUS_SUMMARY => "ingest",
        ASSIGNMENTS | CLUSTERS => "cluster",
        STATS_JSON | STATS_TXT => "analyze",
        _ => "an earlier stage",
    };
    CliError::Validation(format!(
        "missing upstream artifact {}; run `{stage}` first",
        path.display()
    ))
}

/// Builds a CSV body with a leading comment line.
pub fn csv_string(
    comment: &str,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for r in rows {
        w.write_record(&r)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let body = w
        .into_inner()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut out = comment.as_bytes().to_vec();
    out.extend(body);
    String::from_utf8(out).map_err(|e| CliError::Runtime(e.to_string()))
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>, CliError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|_| missing(path))
}

pub fn write_trajectories(
    path: &Path,
    lexicon: &str,
    items: &[Trajectory],
) -> Result<(), CliError> {
    let width = items.first().map_or(0, |t| t.bins.len());
    let mut header = vec!["id".to_string(), "lexicon".to_string()];
    header.extend((1..=width).map(|b| format!("bin_{b}")));
    let rows = items.iter().map(|t| {
        let mut r = vec![t.source_id.clone(), t.lexicon.clone()];
        r.extend(t.bins.iter().map(|v| v.to_string()));
        r
    });
    write_text(
        path,
        &csv_string(&header_comment(Some(lexicon), None), &header, rows)?,
    )
}

pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>, CliError> {
    let mut rdr = reader(path)?;
    let bad = |e: String| CliError::Validation(format!("{}: {e}", path.display()));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() < 3 {
            return Err(bad("row has no bins".into()));
        }
        let bins = rec
            .iter()
            .skip(2)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("bad bin value {v:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(Trajectory {
            source_id: rec[0].to_string(),
            lexicon: rec[1].to_string(),
            bins,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub id: String,
    pub lexicon: String,
    pub cluster: usize,
}

pub fn assignments_string(seed: u64, rows: &[Assignment]) -> Result<String, CliError> {
    let header = ["id", "lexicon", "cluster"].map(String::from);
    csv_string(
        &header_comment(None, Some(seed)),
        &header,
        rows.iter()
            .map(|a| vec![a.id.clone(), a.lexicon.clone(), a.cluster.to_string()]),
    )
}

pub fn read_assignments(path: &Path) -> Result<Vec<Assignment>, CliError> {
    let mut rdr = reader(path)?;
    let bad = |e: String| CliError::Validation(format!("{}: {e}", path.display()));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 columns, got {}", rec.len())));
        }
        out.push(Assignment {
            id: rec[0].to_string(),
            lexicon: rec[1].to_string(),
            cluster: rec[2]
                .parse()
                .map_err(|_| bad(format!("bad cluster {:?}", &rec[2])))?,
        });
    }
    Ok(out)
}

/// Long-format shape table, one row per (cluster, stat, bin).
pub fn shapes_string(
    lexicon: &str,
    seed: u64,
    shapes: &[AggregateShape],
) -> Result<String, CliError> {
    let header = [
        "cluster", "stat", "bin", "center", "ci_low", "ci_high", "sd_low", "sd_high",
    ]
    .map(String::from);
    let mut rows = Vec::new();
    for s in shapes {
        for b in 0..s.center.len() {
            let (lo, hi) = match &s.ci99 {
                Some((lo, hi)) => (lo[b].to_string(), hi[b].to_string()),
                None => (String::new(), String::new()),
            };
            rows.push(vec![
                s.cluster.to_string(),
                s.stat.to_string(),
                (b + 1).to_string(),
                s.center[b].to_string(),
                lo,
                hi,
                s.sd_low[b].to_string(),
                s.sd_high[b].to_string(),
            ]);
        }
    }
    csv_string(&header_comment(Some(lexicon), Some(seed)), &header, rows)
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Adds a stage's wall time to the timings file. Timings are kept out
/// of every other artifact.
pub fn record_timing(out_dir: &Path, stage: &str, millis: f64) -> Result<(), CliError> {
    let path = out_dir.join(TIMINGS);
    let mut map = fs::read_to_string(&path)
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&t).ok())
        .unwrap_or_default();
    map.insert(stage.to_string(), serde_json::json!(millis));
    let mut f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    writeln!(
        f,
        "{}",
        serde_json::to_string_pretty(&map).unwrap_or_default()
    )
    .map_err(|e| io_err(&path, e))
}
