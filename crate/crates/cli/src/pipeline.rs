//! The five pipeline stages. Each reads its inputs from the configured
//! files or from earlier stages' artifacts in the output directory.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lyricarc::clustering::{aggregate_shapes, kmeans, select_k, ShapeStat};
use lyricarc::corpus::{
    compute_rates, corpus_descriptives, load_corpus, load_wordlist, oov_rate, CorpusFormat,
    LoadReport, Severity,
};
use lyricarc::lexicon::{SentimentLexicon, ShifterLexicon};
use lyricarc::stats::{
    build_design, chi_square_2x2, dispersion_check, nb_regression, offset_response,
    response_from_rates, ContingencyTable2x2, NbConfig, NbFit, Response, ResponseMode,
};
use lyricarc::trajectory::{tokenize, Trajectory, TrajectoryExtractor};
use lyricarc::TOOL_VERSION;
use serde::Serialize;
use serde_json::json;

use crate::artifacts::{self, Assignment};
use crate::config::RunConfig;
use crate::svg::render_shapes;
use crate::CliError;

/// Lexicon roles, in output order.
pub const LEXICONS: [&str; 2] = ["standard", "slang"];

#[derive(Debug, Default)]
pub struct StageOutput {
    pub artifacts: Vec<PathBuf>,
    pub notes: Vec<String>,
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", cfg.out_dir.display())))
}

fn load_records(cfg: &RunConfig) -> Result<LoadReport, CliError> {
    let path = cfg.require("corpus", &cfg.corpus)?;
    let format = cfg
        .corpus_format
        .unwrap_or_else(|| CorpusFormat::from_path(path));
    let report =
        load_corpus(path, format, cfg.strict).map_err(|e| CliError::Validation(e.to_string()))?;
    if report.records.is_empty() {
        return Err(CliError::Validation(format!(
            "corpus {} has zero valid records",
            path.display()
        )));
    }
    Ok(report)
}

fn load_lexicon(cfg: &RunConfig, role: &str) -> Result<SentimentLexicon, CliError> {
    let field = match role {
        "standard" => &cfg.standard_lexicon,
        _ => &cfg.slang_lexicon,
    };
    let path = cfg.require(&format!("{role}_lexicon"), field)?;
    SentimentLexicon::load(role, path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_shifters(cfg: &RunConfig) -> Result<ShifterLexicon, CliError> {
    match &cfg.shifters {
        None => Ok(ShifterLexicon::bundled()),
        Some(_) => {
            let path = cfg.require("shifters", &cfg.shifters)?;
            ShifterLexicon::load(path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
        }
    }
}

/// Runs a stage and records its wall time next to the artifacts.
pub fn timed<F>(cfg: &RunConfig, stage: &str, f: F) -> Result<StageOutput, CliError>
where
    F: FnOnce(&RunConfig) -> Result<StageOutput, CliError>,
{
    let start = Instant::now();
    let result = f(cfg);
    if cfg.out_dir.is_dir() {
        artifacts::record_timing(&cfg.out_dir, stage, start.elapsed().as_secs_f64() * 1e3)?;
    }
    result
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<StageOutput, CliError> {
    cfg.validate()?;
    let report = load_records(cfg)?;
    ensure_out_dir(cfg)?;
    let stats =
        corpus_descriptives(&report.records).map_err(|e| CliError::Validation(e.to_string()))?;
    let with_rates = report
        .records
        .iter()
        .filter(|r| r.metadata.is_some())
        .count();

    let oov = match &cfg.wordlist {
        None => serde_json::Value::Null,
        Some(_) => {
            let words = load_wordlist(cfg.require("wordlist", &cfg.wordlist)?)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let mut per_record = Vec::new();
            let mut all = Vec::new();
            for r in &report.records {
                if let Ok(t) = tokenize(&r.raw_text) {
                    per_record.push(
                        oov_rate(&t, &words).map_err(|e| CliError::Validation(e.to_string()))?,
                    );
                    all.extend(t);
                }
            }
            let pooled = oov_rate(&all, &words).map_err(|e| CliError::Validation(e.to_string()))?;
            json!({
                "wordlist_size": words.len(),
                "mean_per_record": per_record.iter().sum::<f64>() / per_record.len() as f64,
                "pooled": pooled,
            })
        }
    };

    let summary = json!({
        "tool": TOOL_VERSION,
        "records": report.records.len(),
        "records_with_rates": with_rates,
        "issues": report.issues,
        "token_counts": "after annotation stripping",
        "descriptives": stats.rows().into_iter().map(|(name, d)| json!({"variable": name, "stats": d})).collect::<Vec<_>>(),
        "oov": oov,
    });
    let path = out_path(cfg, artifacts::CORPUS_SUMMARY);
    artifacts::write_json(&path, &summary)?;
    let mut out = StageOutput {
        artifacts: vec![path],
        ..Default::default()
    };
    out.notes.push(format!(
        "{} records loaded, {} with rate metadata, {} issues",
        report.records.len(),
        with_rates,
        report.issues.len()
    ));
    Ok(out)
}

pub fn cmd_extract(cfg: &RunConfig) -> Result<StageOutput, CliError> {
    cfg.validate()?;
    let lexicons = LEXICONS
        .iter()
        .map(|role| load_lexicon(cfg, role))
        .collect::<Result<Vec<_>, _>>()?;
    let shifters = load_shifters(cfg)?;
    let report = load_records(cfg)?;
    ensure_out_dir(cfg)?;

    let mut records: Vec<_> = report.records.iter().collect();
    records.sort_by(|a, b| a.id.cmp(&b.id));

    let mut skipped: Vec<Vec<String>> = report
        .issues
        .iter()
        .filter(|i| i.severity == Severity::Skipped)
        .map(|i| {
            vec![
                i.id.clone().unwrap_or_default(),
                i.line.to_string(),
                i.reason.clone(),
            ]
        })
        .collect();
    let mut per_lexicon: Vec<Vec<Trajectory>> = vec![Vec::new(); lexicons.len()];
    for rec in &records {
        // the length rule does not depend on the lexicon, so a record is
        // either kept for both or skipped once
        let mut row = Vec::with_capacity(lexicons.len());
        for lex in &lexicons {
            let mut ex = TrajectoryExtractor::new(lex, &shifters);
            ex.valence = cfg.valence;
            ex.dct = cfg.dct;
            ex.min_tokens = cfg.min_tokens;
            match ex.extract(&rec.id, &rec.raw_text) {
                Ok(t) => row.push(t),
                Err(reason) => {
                    skipped.push(vec![rec.id.clone(), String::new(), reason.to_string()]);
                    break;
                }
            }
        }
        if row.len() == lexicons.len() {
            for (t, out) in row.into_iter().zip(per_lexicon.iter_mut()) {
                out.push(t);
            }
        }
    }
    if per_lexicon[0].is_empty() {
        return Err(CliError::Validation(
            "zero records left after extraction".into(),
        ));
    }

    let mut out = StageOutput::default();
    for (role, items) in LEXICONS.iter().zip(&per_lexicon) {
        let path = out_path(cfg, &artifacts::trajectories_file(role));
        artifacts::write_trajectories(&path, role, items)?;
        out.artifacts.push(path);
    }
    let header = ["id", "line", "reason"].map(String::from);
    let path = out_path(cfg, artifacts::SKIPPED);
    artifacts::write_text(
        &path,
        &artifacts::csv_string(
            &artifacts::header_comment(None, None),
            &header,
            skipped.clone(),
        )?,
    )?;
    out.artifacts.push(path);
    out.notes.push(format!(
        "{} trajectories per lexicon, {} records skipped",
        per_lexicon[0].len(),
        skipped.len()
    ));
    Ok(out)
}

#[derive(Debug, Serialize)]
struct LexiconClusters {
    lexicon: String,
    n: usize,
    k: usize,
    k_source: &'static str,
    k_max_evaluated: usize,
    recommended_k: Option<usize>,
    inertia: f64,
    restart: usize,
    iterations: usize,
    sizes: Vec<usize>,
    shares: Vec<f64>,
    centroid_means: Vec<f64>,
}

pub fn cmd_cluster(cfg: &RunConfig) -> Result<StageOutput, CliError> {
    cfg.validate()?;
    let inputs = LEXICONS
        .iter()
        .map(|role| {
            artifacts::read_trajectories(&out_path(cfg, &artifacts::trajectories_file(role)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = StageOutput::default();
    let mut assignments = Vec::new();
    let mut summaries = Vec::new();
    let cerr = |role: &str, e: lyricarc::clustering::ClusterError| {
        CliError::Validation(format!("{role}: {e}"))
    };

    for (role, points) in LEXICONS.iter().zip(&inputs) {
        let n = points.len();
        if let Some(k) = cfg.k {
            if k > n {
                return Err(CliError::Validation(format!(
                    "{role}: {n} trajectories, fewer than k = {k}"
                )));
            }
        }
        let k_max = cfg.k_max.min(n.saturating_sub(1));
        if k_max < cfg.k_min {
            return Err(CliError::Validation(format!(
                "{role}: {n} trajectories are too few for k selection"
            )));
        }
        let diag = select_k(points, cfg.k_min, k_max, cfg.seed, cfg.restarts)
            .map_err(|e| cerr(role, e))?;
        let (k, k_source) = match (cfg.k, diag.recommended_k) {
            (Some(k), _) => (k, "fixed"),
            (None, Some(k)) => (k, "silhouette"),
            (None, None) => {
                return Err(CliError::Validation(format!(
                    "{role}: no silhouette recommendation in k range {}..={k_max}; set k",
                    cfg.k_min
                )))
            }
        };
        let model = kmeans(points, k, cfg.seed, cfg.restarts).map_err(|e| cerr(role, e))?;

        let diag_rows = diag.wss_by_k.iter().map(|(k, wss)| {
            vec![
                k.to_string(),
                wss.to_string(),
                diag.silhouette_by_k
                    .get(k)
                    .map(|s| s.to_string())
                    .unwrap_or_default(),
            ]
        });
        let path = out_path(cfg, &artifacts::diagnostics_file(role));
        let header = ["k", "wss", "silhouette"].map(String::from);
        artifacts::write_text(
            &path,
            &artifacts::csv_string(
                &artifacts::header_comment(Some(role), Some(cfg.seed)),
                &header,
                diag_rows,
            )?,
        )?;
        out.artifacts.push(path);

        let mut shapes = Vec::new();
        for stat in [ShapeStat::Mean, ShapeStat::Median] {
            let s =
                aggregate_shapes(points, &model.assignments, k, stat).map_err(|e| cerr(role, e))?;
            let title = format!("{role} sentiment: {stat} trajectory per cluster (k = {k})");
            let caption = match stat {
                ShapeStat::Mean => format!(
                    "coloured dashed = 99% CI, black dashed = +/- 1 SD; seed {}; {TOOL_VERSION}",
                    cfg.seed
                ),
                ShapeStat::Median => {
                    format!("black dashed = +/- 1 SD; seed {}; {TOOL_VERSION}", cfg.seed)
                }
            };
            let path = out_path(cfg, &artifacts::plot_file(role, &stat.to_string()));
            artifacts::write_text(&path, &render_shapes(&s, &title, &caption))?;
            out.artifacts.push(path);
            shapes.extend(s);
        }
        let path = out_path(cfg, &artifacts::shapes_file(role));
        artifacts::write_text(&path, &artifacts::shapes_string(role, cfg.seed, &shapes)?)?;
        out.artifacts.push(path);

        let mut rows: Vec<Assignment> = points
            .iter()
            .zip(&model.assignments)
            .map(|(p, &c)| Assignment {
                id: p.source_id.clone(),
                lexicon: role.to_string(),
                cluster: c,
            })
            .collect();
        rows.sort_by(|a, b| a.id.cmp(&b.id));
        assignments.extend(rows);

        let sizes = model.sizes();
        out.notes
            .push(format!("{role}: k = {k} ({k_source}), sizes {sizes:?}"));
        summaries.push(LexiconClusters {
            lexicon: role.to_string(),
            n,
            k,
            k_source,
            k_max_evaluated: k_max,
            recommended_k: diag.recommended_k,
            inertia: model.inertia,
            restart: model.restart,
            iterations: model.iterations,
            shares: sizes.iter().map(|&s| s as f64 / n as f64).collect(),
            sizes,
            centroid_means: model
                .centroids
                .iter()
                .map(|c| c.iter().sum::<f64>() / c.len() as f64)
                .collect(),
        });
    }

    let path = out_path(cfg, artifacts::ASSIGNMENTS);
    artifacts::write_text(
        &path,
        &artifacts::assignments_string(cfg.seed, &assignments)?,
    )?;
    out.artifacts.push(path);
    let path = out_path(cfg, artifacts::CLUSTERS);
    artifacts::write_json(
        &path,
        &json!({
            "tool": TOOL_VERSION,
            "seed": cfg.seed,
            "restarts": cfg.restarts,
            "cluster_order": "cluster 0 has the highest mean centroid value",
            "lexicons": summaries,
        }),
    )?;
    out.artifacts.push(path);
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ModelReport {
    response: Response,
    n: usize,
    theta: f64,
    log_likelihood: f64,
    converged: bool,
    iterations: usize,
    coefficients: Vec<lyricarc::stats::CoefficientRow>,
}

fn model_report(response: Response, n: usize, fit: &NbFit) -> ModelReport {
    ModelReport {
        response,
        n,
        theta: fit.theta,
        log_likelihood: fit.log_likelihood,
        converged: fit.converged,
        iterations: fit.iterations,
        coefficients: fit.coefficient_table(),
    }
}

fn render_stats_text(
    cfg: &RunConfig,
    table: &ContingencyTable2x2,
    chi: &lyricarc::ChiSquareResult,
    dispersion: &BTreeMap<String, f64>,
    models: &[ModelReport],
) -> String {
    let mut s = String::new();
    let mode = match cfg.response_mode {
        ResponseMode::Rounded => "rounded",
        ResponseMode::Offset => "offset",
    };
    let _ = writeln!(
        s,
        "# {TOOL_VERSION}; seed {}; response mode {mode}",
        cfg.seed
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Cross-cluster distribution (rows: standard, columns: slang)"
    );
    let _ = writeln!(
        s,
        "{:<22}{:>12}{:>12}{:>10}",
        "", "slang 0", "slang 1", "TOTAL"
    );
    let _ = writeln!(
        s,
        "{:<22}{:>12}{:>12}{:>10}",
        "standard 0",
        table.a,
        table.b,
        table.a + table.b
    );
    let _ = writeln!(
        s,
        "{:<22}{:>12}{:>12}{:>10}",
        "standard 1",
        table.c,
        table.d,
        table.c + table.d
    );
    let _ = writeln!(
        s,
        "{:<22}{:>12}{:>12}{:>10}",
        "TOTAL",
        table.a + table.c,
        table.b + table.d,
        table.total()
    );
    let _ = writeln!(
        s,
        "chi2({}) = {:.2}, p = {:.3}{}",
        chi.df,
        chi.statistic,
        chi.p_value,
        if chi.yates_applied {
            " (Yates corrected)"
        } else {
            ""
        }
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "Dispersion (variance / mean)");
    for (k, v) in dispersion {
        let _ = writeln!(s, "  {k:<12}{v:.2}");
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Negative binomial coefficients, log scale (SE); indicator = 1 for cluster 0, reference = cluster 1"
    );
    let _ = writeln!(
        s,
        "{:<20}{:>18}{:>18}{:>18}",
        "", "Standard", "Slang", "Interaction"
    );
    for m in models {
        let cell = |i: usize| {
            let c = &m.coefficients[i];
            let star = if c.p < 0.001 { "*" } else { "" };
            format!("{:.2} ({:.2}){star}", c.estimate, c.std_error)
        };
        let _ = writeln!(
            s,
            "{:<20}{:>18}{:>18}{:>18}",
            format!("{} model", m.response),
            cell(1),
            cell(2),
            cell(3)
        );
    }
    let _ = writeln!(s, "* p < .001");
    let _ = writeln!(s);
    for m in models {
        let _ = writeln!(
            s,
            "{} model: n = {}, theta = {:.4}, logLik = {:.3}, converged = {}",
            m.response, m.n, m.theta, m.log_likelihood, m.converged
        );
        let _ = writeln!(
            s,
            "  {:<16}{:>10}{:>10}{:>9}{:>10}{:>14}{:>10}",
            "term", "estimate", "SE", "z", "p", "exp(b)", "1/exp(b)"
        );
        for c in &m.coefficients {
            let _ = writeln!(
                s,
                "  {:<16}{:>10.4}{:>10.4}{:>9.3}{:>10.4}{:>14.4}{:>10.4}",
                c.name, c.estimate, c.std_error, c.z, c.p, c.rate_ratio, c.inverse_rate_ratio
            );
        }
    }
    s
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<StageOutput, CliError> {
    cfg.validate()?;
    let assignments = artifacts::read_assignments(&out_path(cfg, artifacts::ASSIGNMENTS))?;
    let report = load_records(cfg)?;

    let mut by_lex: HashMap<&str, HashMap<&str, usize>> = HashMap::new();
    for a in &assignments {
        by_lex
            .entry(a.lexicon.as_str())
            .or_default()
            .insert(a.id.as_str(), a.cluster);
    }
    let std_map = by_lex.get("standard").cloned().unwrap_or_default();
    let slang_map = by_lex.get("slang").cloned().unwrap_or_default();

    let mut records: Vec<_> = report.records.iter().collect();
    records.sort_by(|a, b| a.id.cmp(&b.id));
    let paired: Vec<(&lyricarc::LyricRecord, usize, usize)> = records
        .iter()
        .filter_map(|r| {
            Some((
                *r,
                *std_map.get(r.id.as_str())?,
                *slang_map.get(r.id.as_str())?,
            ))
        })
        .collect();
    if paired.is_empty() {
        return Err(CliError::Validation(
            "no record has assignments for both lexicons".into(),
        ));
    }

    let stds: Vec<usize> = paired.iter().map(|p| p.1).collect();
    let slangs: Vec<usize> = paired.iter().map(|p| p.2).collect();
    let table = ContingencyTable2x2::from_labels(&stds, &slangs)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let chi = chi_square_2x2(&table, cfg.yates).map_err(|e| CliError::Validation(e.to_string()))?;

    let with_meta: Vec<_> = paired.iter().filter(|p| p.0.metadata.is_some()).collect();
    if with_meta.is_empty() {
        return Err(CliError::Validation(
            "no clustered record carries video metadata".into(),
        ));
    }
    let design = build_design(
        &with_meta.iter().map(|p| p.1).collect::<Vec<_>>(),
        &with_meta.iter().map(|p| p.2).collect::<Vec<_>>(),
        &1,
        &1,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;

    let mut dispersion = BTreeMap::new();
    let mut models = Vec::new();
    let mut unconverged = Vec::new();
    for response in [Response::Views, Response::Engagement] {
        let (y, offset): (Vec<f64>, Option<Vec<f64>>) = match cfg.response_mode {
            ResponseMode::Rounded => (
                with_meta
                    .iter()
                    .map(|p| {
                        response_from_rates(
                            &compute_rates(p.0.metadata.as_ref().unwrap()),
                            response,
                        ) as f64
                    })
                    .collect(),
                None,
            ),
            ResponseMode::Offset => {
                let pairs: Vec<(u64, f64)> = with_meta
                    .iter()
                    .map(|p| offset_response(p.0.metadata.as_ref().unwrap(), response))
                    .collect();
                (
                    pairs.iter().map(|p| p.0 as f64).collect(),
                    Some(pairs.iter().map(|p| p.1).collect()),
                )
            }
        };
        dispersion.insert(
            response.to_string(),
            dispersion_check(&y).map_err(|e| CliError::Validation(format!("{response}: {e}")))?,
        );
        let fit = nb_regression(&y, &design, offset.as_deref(), &NbConfig::default())
            .map_err(|e| CliError::Validation(format!("{response} model: {e}")))?;
        if !fit.converged {
            unconverged.push(response.to_string());
        }
        models.push(model_report(response, y.len(), &fit));
    }

    ensure_out_dir(cfg)?;
    let stats = json!({
        "tool": TOOL_VERSION,
        "seed": cfg.seed,
        "response_mode": cfg.response_mode,
        "records_clustered": paired.len(),
        "records_with_metadata": with_meta.len(),
        "coding": "indicator = 1 for cluster 0 (higher mean sentiment); reference = cluster 1",
        "crosstab": {"rows": "standard cluster", "columns": "slang cluster", "counts": [[table.a, table.b], [table.c, table.d]]},
        "chi_square": {"statistic": chi.statistic, "df": chi.df, "p": chi.p_value, "yates": chi.yates_applied},
        "dispersion": dispersion,
        "models": models,
    });
    let mut out = StageOutput::default();
    let path = out_path(cfg, artifacts::STATS_JSON);
    artifacts::write_json(&path, &stats)?;
    out.artifacts.push(path);
    let path = out_path(cfg, artifacts::STATS_TXT);
    artifacts::write_text(
        &path,
        &render_stats_text(cfg, &table, &chi, &dispersion, &models),
    )?;
    out.artifacts.push(path);
    out.notes.push(format!(
        "chi2 = {:.3}, p = {:.3}",
        chi.statistic, chi.p_value
    ));
    if !unconverged.is_empty() {
        return Err(CliError::Runtime(format!(
            "negative binomial fit did not converge for: {}",
            unconverged.join(", ")
        )));
    }
    Ok(out)
}

fn input_digests(cfg: &RunConfig) -> Result<Vec<serde_json::Value>, CliError> {
    let mut v = Vec::new();
    let entries: [(&str, &Option<PathBuf>); 5] = [
        ("corpus", &cfg.corpus),
        ("standard_lexicon", &cfg.standard_lexicon),
        ("slang_lexicon", &cfg.slang_lexicon),
        ("shifters", &cfg.shifters),
        ("wordlist", &cfg.wordlist),
    ];
    for (role, path) in entries {
        match path {
            Some(p) => v.push(json!({
                "role": role,
                "path": p.display().to_string(),
                "sha256": artifacts::sha256_file(p)?,
            })),
            None if role == "shifters" => v.push(json!({
                "role": role,
                "path": "(bundled)",
                "sha256": artifacts::sha256_hex(ShifterLexiconText::BUNDLED.as_bytes()),
            })),
            None => {}
        }
    }
    Ok(v)
}

struct ShifterLexiconText;

impl ShifterLexiconText {
    const BUNDLED: &'static str = include_str!("../../core/data/shifters.tsv");
}

fn fmt_desc(d: &Option<lyricarc::corpus::Descriptive>) -> String {
    match d {
        Some(d) => format!(
            "{:.2} ({:.2}) [{:.2}; {:.2}]",
            d.mean, d.sd, d.ci99_low, d.ci99_high
        ),
        None => "n/a".into(),
    }
}

pub fn cmd_report(cfg: &RunConfig) -> Result<StageOutput, CliError> {
    cfg.validate()?;
    let summary_json = artifacts::read_json(&out_path(cfg, artifacts::CORPUS_SUMMARY))?;
    let clusters_json = artifacts::read_json(&out_path(cfg, artifacts::CLUSTERS))?;
    let stats_txt_path = out_path(cfg, artifacts::STATS_TXT);
    artifacts::read_json(&out_path(cfg, artifacts::STATS_JSON))?;
    let stats_txt =
        fs::read_to_string(&stats_txt_path).map_err(|_| artifacts::missing(&stats_txt_path))?;

    let mut s = String::new();
    let _ = writeln!(s, "# {TOOL_VERSION}; seed {}", cfg.seed);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Corpus: {} records ({} with video metadata)",
        summary_json["records"], summary_json["records_with_rates"]
    );
    let _ = writeln!(s, "{:<20}Mean (SD) [99% CI of mean]", "Variable");
    if let Some(rows) = summary_json["descriptives"].as_array() {
        for row in rows {
            let d: Option<lyricarc::corpus::Descriptive> =
                (!row["stats"].is_null()).then(|| lyricarc::corpus::Descriptive {
                    n: row["stats"]["n"].as_u64().unwrap_or(0) as usize,
                    mean: row["stats"]["mean"].as_f64().unwrap_or(f64::NAN),
                    sd: row["stats"]["sd"].as_f64().unwrap_or(f64::NAN),
                    ci99_low: row["stats"]["ci99_low"].as_f64().unwrap_or(f64::NAN),
                    ci99_high: row["stats"]["ci99_high"].as_f64().unwrap_or(f64::NAN),
                });
            let _ = writeln!(
                s,
                "{:<20}{}",
                row["variable"].as_str().unwrap_or(""),
                fmt_desc(&d)
            );
        }
    }
    if let Some(oov) = summary_json["oov"].as_object() {
        let _ = writeln!(
            s,
            "Out-of-vocabulary rate: {:.2}% mean per lyric ({:.2}% pooled)",
            oov["mean_per_record"].as_f64().unwrap_or(f64::NAN) * 100.0,
            oov["pooled"].as_f64().unwrap_or(f64::NAN) * 100.0
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Clusters");
    if let Some(lexs) = clusters_json["lexicons"].as_array() {
        for l in lexs {
            let sizes = l["sizes"].as_array().cloned().unwrap_or_default();
            let shares = l["shares"].as_array().cloned().unwrap_or_default();
            let parts: Vec<String> = sizes
                .iter()
                .zip(&shares)
                .enumerate()
                .map(|(i, (n, sh))| {
                    format!(
                        "cluster {i}: n = {n} ({:.0}%)",
                        sh.as_f64().unwrap_or(0.0) * 100.0
                    )
                })
                .collect();
            let _ = writeln!(
                s,
                "  {} (k = {}, {}): {}",
                l["lexicon"].as_str().unwrap_or(""),
                l["k"],
                l["k_source"].as_str().unwrap_or(""),
                parts.join(", ")
            );
        }
    }
    let _ = writeln!(s);
    for line in stats_txt.lines().skip_while(|l| l.starts_with('#')) {
        let _ = writeln!(s, "{line}");
    }

    let mut out = StageOutput::default();
    let path = out_path(cfg, artifacts::SUMMARY);
    artifacts::write_text(&path, &s)?;
    out.artifacts.push(path);

    let mut files: Vec<String> = fs::read_dir(&cfg.out_dir)
        .map_err(|e| CliError::Runtime(e.to_string()))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|f| f != artifacts::MANIFEST && f != artifacts::TIMINGS)
        .collect();
    files.sort();
    let artifact_list = files
        .iter()
        .map(|f| {
            let p = cfg.out_dir.join(f);
            let bytes = fs::metadata(&p).map(|m| m.len()).unwrap_or(0);
            Ok(json!({"file": f, "sha256": artifacts::sha256_file(&p)?, "bytes": bytes}))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let manifest = json!({
        "tool_version": TOOL_VERSION,
        "config": cfg,
        "inputs": input_digests(cfg)?,
        "artifacts": artifact_list,
        "timings_file": artifacts::TIMINGS,
    });
    let path = out_path(cfg, artifacts::MANIFEST);
    artifacts::write_json(&path, &manifest)?;
    out.artifacts.push(path);
    out.notes
        .push(format!("{} artifacts listed in manifest", files.len()));
    Ok(out)
}

/// Helper for callers that want the path of a lexicon's trajectories.
pub fn trajectories_path(out_dir: &Path, lexicon: &str) -> PathBuf {
    out_dir.join(artifacts::trajectories_file(lexicon))
}
