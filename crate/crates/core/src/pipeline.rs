//! File-based corpus commands: extract, clean, analyze, validate, align.
//!
//! Each command reads files, writes files, and records a [`RunManifest`]
//! next to its primary output. Parallel stages gather results in input
//! order, so outputs are byte-stable across runs.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::alignment::{align_all, VolumeMetadata};
use crate::config::{config_digest, sha256_hex, ConfigError};
use crate::extraction::{
    Extraction, ExtractionError, Extractor, HttpClient, HttpConfig, MockClient, RejectReason,
    StructuredClient, TokenBudget,
};
use crate::io::{
    fmt_opt, read_corpus_manifest, read_metadata, read_networks, write_networks, write_table,
    DataError, NetworkFile,
};
use crate::metrics::{analyze_network, NetworkAnalysis, METRIC_NAMES};
use crate::stats::{decade_trend, group_compare, AnalysisRow, Genre};
use crate::svg::{histogram_svg, Series, DEFAULT_BINS};
use crate::taxonomy::{dedupe_corpus, dedupe_network, repair, CharacterNetwork};
use crate::validation::{score_corpus, AccuracyReport, ValidationError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("backend setup failed: {0}")]
    Backend(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{path}: none of {lines} non-blank line(s) parsed as a network")]
    NothingParsed { path: PathBuf, lines: usize },
}

fn io_context(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> PipelineError {
    let context = context.into();
    move |source| PipelineError::Io { context, source }
}

/// Audit record written next to each command's output.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub config_digest: String,
    pub counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub truncated_volumes: Vec<String>,
    pub notices: Vec<String>,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    fn input(&mut self, name: &str, path: &Path) {
        self.inputs.insert(name.into(), path.display().to_string());
    }

    fn output(&mut self, name: &str, path: &Path) {
        self.outputs.insert(name.into(), path.display().to_string());
    }

    fn count(&mut self, name: &str, value: usize) {
        self.counts.insert(name.into(), value as u64);
    }

    pub fn get(&self, name: &str) -> u64 {
        self.counts.get(name).copied().unwrap_or(0)
    }

    pub fn write(&self, path: &Path) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(io_context(format!("writing {}", path.display())))
    }
}

/// `<out>.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

// ---------------------------------------------------------------- extract

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusSource {
    /// One plain-text file per volume; the file stem is the volume id.
    Directory(PathBuf),
    /// CSV with columns `volume_id,path`.
    Manifest(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Mock { fixtures: PathBuf },
    Http(HttpConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOptions {
    pub corpus: CorpusSource,
    pub backend: Backend,
    pub budget: TokenBudget,
    pub out: PathBuf,
    pub rejects: PathBuf,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

/// Lists `(volume_id, path)` in a deterministic order.
pub fn list_corpus(source: &CorpusSource) -> Result<Vec<(String, PathBuf)>, PipelineError> {
    match source {
        CorpusSource::Manifest(path) => Ok(read_corpus_manifest(path)?),
        CorpusSource::Directory(dir) => {
            let entries = std::fs::read_dir(dir).map_err(io_context(format!("listing {}", dir.display())))?;
            let mut files = Vec::new();
            for entry in entries {
                let entry = entry.map_err(io_context(format!("listing {}", dir.display())))?;
                let path = entry.path();
                let hidden = entry.file_name().to_string_lossy().starts_with('.');
                if path.is_file() && !hidden {
                    files.push(path);
                }
            }
            files.sort();
            let mut seen = HashMap::new();
            let mut out = Vec::with_capacity(files.len());
            for path in files {
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                if let Some(prev) = seen.insert(id.clone(), path.clone()) {
                    return Err(PipelineError::Input(format!(
                        "{} and {} share volume id `{id}`",
                        prev.display(),
                        path.display()
                    )));
                }
                out.push((id, path));
            }
            Ok(out)
        }
    }
}

fn backend_client(backend: &Backend) -> Result<Box<dyn StructuredClient>, PipelineError> {
    Ok(match backend {
        Backend::Mock { fixtures } => {
            Box::new(MockClient::from_fixture_file(fixtures).map_err(PipelineError::Backend)?)
        }
        Backend::Http(config) => Box::new(HttpClient::new(config.clone())),
    })
}

fn extract_digest(opts: &ExtractOptions) -> Result<String, PipelineError> {
    let backend = match &opts.backend {
        Backend::Mock { fixtures } => {
            let bytes = std::fs::read(fixtures)
                .map_err(io_context(format!("reading {}", fixtures.display())))?;
            json!({"kind": "mock", "fixtures_sha256": sha256_hex(&bytes)})
        }
        Backend::Http(c) => json!({
            "kind": "http",
            "api_url": c.api_url,
            "model": c.model,
            "timeout_secs": c.timeout_secs,
        }),
    };
    Ok(config_digest(&json!({
        "command": "extract",
        "backend": backend,
        "max_context_tokens": opts.budget.max_context_tokens(),
        "max_output_tokens": opts.budget.max_output_tokens(),
        "token_estimator": "words * 32 / 10",
    })))
}

/// Extracts one network per volume. Per-volume failures go to the
/// rejection log; only setup errors abort.
pub fn cmd_extract(opts: &ExtractOptions) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("extract");
    match &opts.corpus {
        CorpusSource::Directory(p) => manifest.input("corpus", p),
        CorpusSource::Manifest(p) => manifest.input("manifest", p),
    }
    if let Backend::Mock { fixtures } = &opts.backend {
        manifest.input("fixtures", fixtures);
    }
    manifest.config_digest = extract_digest(opts)?;

    let volumes = list_corpus(&opts.corpus)?;
    let extractor = Extractor::new(backend_client(&opts.backend)?).budget(opts.budget);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| PipelineError::Backend(e.to_string()))?;
    let results: Vec<Result<Extraction, ExtractionError>> = pool.install(|| {
        volumes
            .par_iter()
            .map(|(id, path)| {
                let bytes = std::fs::read(path).map_err(|e| {
                    ExtractionError::MalformedOutput(format!("unreadable input {}: {e}", path.display()))
                })?;
                extractor.extract(id, &String::from_utf8_lossy(&bytes))
            })
            .collect()
    });

    let mut networks = Vec::new();
    let mut rejects = Vec::new();
    let mut by_reason: BTreeMap<&str, usize> = BTreeMap::new();
    let (mut malformed, mut duplicates) = (0, 0);
    for ((id, _), result) in volumes.iter().zip(results) {
        match result {
            Ok(e) => {
                malformed += e.malformed_records_dropped;
                duplicates += e.duplicate_records_dropped;
                if e.truncated {
                    manifest.truncated_volumes.push(id.clone());
                }
                networks.push(e.network);
            }
            Err(err) => {
                let reason = err.reject_reason().as_str();
                *by_reason.entry(reason).or_default() += 1;
                rejects.push([id.clone(), reason.to_string(), err.to_string()]);
            }
        }
    }

    write_networks(&opts.out, &networks)?;
    write_table(&opts.rejects, &["volume_id", "reason", "detail"], &rejects)?;
    manifest.output("networks", &opts.out);
    manifest.output("rejects", &opts.rejects);
    manifest.count("input_volumes", volumes.len());
    manifest.count("processed", networks.len());
    manifest.count("rejected", rejects.len());
    for reason in [
        RejectReason::TooLong,
        RejectReason::ContentFiltered,
        RejectReason::Transport,
        RejectReason::Malformed,
    ] {
        let name = reason.as_str();
        manifest.count(&format!("rejected_{name}"), by_reason.get(name).copied().unwrap_or(0));
    }
    manifest.count("malformed_records_dropped", malformed);
    manifest.count("duplicate_records_dropped", duplicates);
    manifest.count("truncated", manifest.truncated_volumes.len());
    manifest.write(&manifest_path(&opts.out))?;
    Ok(manifest)
}

// ------------------------------------------------------------------ clean

fn read_nonempty(path: &Path) -> Result<NetworkFile, PipelineError> {
    let file = read_networks(path)?;
    if file.lines > 0 && file.networks.is_empty() {
        return Err(PipelineError::NothingParsed {
            path: path.to_path_buf(),
            lines: file.lines,
        });
    }
    Ok(file)
}

fn bad_line_notices(manifest: &mut RunManifest, path: &Path, file: &NetworkFile) {
    for bad in &file.bad_lines {
        manifest
            .notices
            .push(format!("{}:{}: skipped: {}", path.display(), bad.line, bad.message));
    }
}

/// Repair, then per-network pair dedup, then corpus dedup.
pub fn clean_networks(nets: Vec<CharacterNetwork>) -> (Vec<CharacterNetwork>, CleanCounts) {
    let mut counts = CleanCounts {
        networks_in: nets.len(),
        ..CleanCounts::default()
    };
    let mut pair_deduped = Vec::with_capacity(nets.len());
    for net in nets {
        counts.repaired_records += net.records.iter().filter(|r| !r.is_consistent()).count();
        let repaired = CharacterNetwork::new(net.volume_id, net.records.into_iter().map(repair).collect());
        let (net, dropped) = dedupe_network(repaired);
        counts.duplicate_records_dropped += dropped;
        pair_deduped.push(net);
    }
    let out = dedupe_corpus(pair_deduped);
    counts.duplicate_networks_dropped = counts.networks_in - out.len();
    counts.networks_out = out.len();
    (out, counts)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CleanCounts {
    pub networks_in: usize,
    pub repaired_records: usize,
    pub duplicate_records_dropped: usize,
    pub duplicate_networks_dropped: usize,
    pub networks_out: usize,
}

pub fn cmd_clean(input: &Path, out: &Path) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("clean");
    manifest.input("networks", input);
    manifest.config_digest = config_digest(&json!({"command": "clean"}));
    let file = read_nonempty(input)?;
    bad_line_notices(&mut manifest, input, &file);
    let malformed = file.malformed_records_dropped;
    let (lines, bad) = (file.lines, file.bad_lines.len());
    let (cleaned, counts) = clean_networks(file.networks);
    write_networks(out, &cleaned)?;
    manifest.output("networks", out);
    manifest.count("input_lines", lines);
    manifest.count("bad_lines", bad);
    manifest.count("networks_in", counts.networks_in);
    manifest.count("malformed_records_dropped", malformed);
    manifest.count("repaired_records", counts.repaired_records);
    manifest.count("duplicate_records_dropped", counts.duplicate_records_dropped);
    manifest.count("duplicate_networks_dropped", counts.duplicate_networks_dropped);
    manifest.count("networks_out", counts.networks_out);
    manifest.write(&manifest_path(out))?;
    Ok(manifest)
}

// ---------------------------------------------------------------- analyze

/// Metrics drawn as histograms when `--svg` is given and no explicit list
/// is passed.
pub const DEFAULT_SVG_METRICS: [&str; 8] = [
    "node_count",
    "edge_count",
    "component_count",
    "transitivity",
    "community_count_overall",
    "community_counts_by_type_social",
    "community_counts_by_type_professional",
    "community_counts_by_type_familial",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub networks: PathBuf,
    pub metadata: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Metrics to plot; empty disables SVG output.
    pub svg_metrics: Vec<String>,
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const COMMUNITIES_FILE: &str = "communities.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const TRENDS_FILE: &str = "trends.csv";
pub const ANALYZE_MANIFEST: &str = "manifest.json";

pub fn svg_file_name(metric: &str) -> String {
    format!("hist_{metric}.svg")
}

pub fn cmd_analyze(opts: &AnalyzeOptions) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("analyze");
    manifest.input("networks", &opts.networks);
    if let Some(m) = &opts.metadata {
        manifest.input("metadata", m);
    }
    for metric in &opts.svg_metrics {
        if !METRIC_NAMES.contains(&metric.as_str()) {
            return Err(PipelineError::Input(format!("unknown metric `{metric}` for --svg")));
        }
    }
    manifest.config_digest = config_digest(&json!({
        "command": "analyze",
        "svg_metrics": opts.svg_metrics,
        "svg_bins": DEFAULT_BINS,
    }));

    let file = read_networks(&opts.networks)?;
    bad_line_notices(&mut manifest, &opts.networks, &file);
    let metadata = match &opts.metadata {
        Some(p) => Some(read_metadata(p)?),
        None => None,
    };
    std::fs::create_dir_all(&opts.out_dir)
        .map_err(io_context(format!("creating {}", opts.out_dir.display())))?;

    let analyses: Vec<_> = file.networks.par_iter().map(analyze_network).collect();
    let mut done: Vec<NetworkAnalysis> = Vec::with_capacity(analyses.len());
    for (net, a) in file.networks.iter().zip(analyses) {
        match a {
            Ok(a) => done.push(a),
            Err(e) => manifest
                .notices
                .push(format!("{}: skipped: {e}", net.volume_id)),
        }
    }

    let metrics_path = opts.out_dir.join(METRICS_FILE);
    let mut header = vec!["volume_id"];
    header.extend(METRIC_NAMES);
    write_table(
        &metrics_path,
        &header,
        done.iter().map(|a| {
            let mut row = vec![a.metrics.volume_id.clone()];
            row.extend(METRIC_NAMES.iter().map(|m| fmt_opt(a.metrics.metric(m))));
            row
        }),
    )?;
    manifest.output("metrics", &metrics_path);

    let communities_path = opts.out_dir.join(COMMUNITIES_FILE);
    let mut community_rows = Vec::new();
    for a in &done {
        for p in &a.partitions {
            for (node, community) in p.nodes.iter().zip(&p.partition.assignment) {
                community_rows.push([
                    a.metrics.volume_id.clone(),
                    node.clone(),
                    community.to_string(),
                    p.scope.as_str().to_string(),
                ]);
            }
        }
    }
    write_table(
        &communities_path,
        &["volume_id", "node", "community_id", "graph_scope"],
        &community_rows,
    )?;
    manifest.output("communities", &communities_path);

    let meta_by_id: HashMap<&str, &VolumeMetadata> = metadata
        .iter()
        .flatten()
        .rev()
        .map(|m| (m.volume_id.as_str(), m))
        .collect();
    let rows: Vec<AnalysisRow> = done
        .iter()
        .map(|a| AnalysisRow {
            metadata: meta_by_id.get(a.metrics.volume_id.as_str()).map(|m| (*m).clone()),
            metrics: a.metrics.clone(),
        })
        .collect();
    let with_metadata = rows.iter().filter(|r| r.metadata.is_some()).count();
    if with_metadata == 0 {
        manifest
            .notices
            .push("no network has metadata; comparison and trend reports are empty".into());
    }

    let comparisons: Vec<_> = METRIC_NAMES
        .par_iter()
        .map(|m| (m, group_compare(&rows, m)))
        .collect();
    let mut comparison_rows = Vec::new();
    for (metric, result) in comparisons {
        match result {
            Ok(c) => comparison_rows.push(vec![
                metric.to_string(),
                c.fiction_mean().to_string(),
                c.nonfiction_mean().to_string(),
                c.test.t_statistic.to_string(),
                c.test.degrees_of_freedom.to_string(),
                c.test.p_value.to_string(),
                c.test.n_x.to_string(),
                c.test.n_y.to_string(),
            ]),
            Err(e) if with_metadata > 0 => manifest.notices.push(format!("comparison {metric}: {e}")),
            Err(_) => {}
        }
    }
    let comparison_path = opts.out_dir.join(COMPARISON_FILE);
    write_table(
        &comparison_path,
        &["metric", "fiction_mean", "nonfiction_mean", "t", "df", "p", "n_fiction", "n_nonfiction"],
        &comparison_rows,
    )?;
    manifest.output("comparison", &comparison_path);

    let jobs: Vec<(&str, Genre)> = METRIC_NAMES
        .iter()
        .flat_map(|m| Genre::ALL.map(|g| (*m, g)))
        .collect();
    let trends: Vec<_> = jobs
        .par_iter()
        .map(|(m, g)| (*m, *g, decade_trend(&rows, m, *g)))
        .collect();
    let mut trend_rows = Vec::new();
    // identical failures within a group collapse into one notice
    let mut trend_failures: BTreeMap<(Genre, String), Vec<&str>> = BTreeMap::new();
    for (metric, genre, result) in trends {
        match result {
            Ok(t) => trend_rows.push(vec![
                metric.to_string(),
                genre.as_str().to_string(),
                t.correlation.r.to_string(),
                t.correlation.p_value.to_string(),
                t.decade_means.len().to_string(),
            ]),
            Err(e) => trend_failures.entry((genre, e.to_string())).or_default().push(metric),
        }
    }
    if with_metadata > 0 {
        for ((genre, message), metrics) in trend_failures {
            manifest.notices.push(format!(
                "trend ({}): {message}: {}",
                genre.as_str(),
                metrics.join(", ")
            ));
        }
    }
    let trends_path = opts.out_dir.join(TRENDS_FILE);
    write_table(&trends_path, &["metric", "group", "r", "p", "n_decades"], &trend_rows)?;
    manifest.output("trends", &trends_path);

    let mut svg_written = 0;
    for metric in &opts.svg_metrics {
        let value = |r: &AnalysisRow| r.metrics.metric(metric);
        let groups: Vec<(&str, Vec<f64>)> = if with_metadata == 0 {
            vec![("all", rows.iter().filter_map(value).collect())]
        } else {
            Genre::ALL
                .iter()
                .map(|g| {
                    let vals = rows
                        .iter()
                        .filter(|r| {
                            r.metadata.as_ref().and_then(|m| m.is_fiction)
                                == Some(*g == Genre::Fiction)
                        })
                        .filter_map(value)
                        .collect();
                    (g.as_str(), vals)
                })
                .collect()
        };
        let series: Vec<Series<'_>> = groups
            .iter()
            .map(|(label, values)| Series { label, values })
            .collect();
        match histogram_svg(metric, &series, DEFAULT_BINS) {
            Some(svg) => {
                let path = opts.out_dir.join(svg_file_name(metric));
                std::fs::write(&path, svg).map_err(io_context(format!("writing {}", path.display())))?;
                manifest.output(&format!("svg_{metric}"), &path);
                svg_written += 1;
            }
            None => manifest.notices.push(format!("histogram {metric}: no values to plot")),
        }
    }

    manifest.count("input_lines", file.lines);
    manifest.count("bad_lines", file.bad_lines.len());
    manifest.count("networks_analyzed", done.len());
    manifest.count("networks_skipped", file.networks.len() - done.len());
    manifest.count("networks_with_metadata", with_metadata);
    manifest.count("comparison_rows", comparison_rows.len());
    manifest.count("trend_rows", trend_rows.len());
    manifest.count("svg_files", svg_written);
    manifest.write(&opts.out_dir.join(ANALYZE_MANIFEST))?;
    Ok(manifest)
}

// --------------------------------------------------------------- validate

pub const VALIDATION_HEADER: [&str; 8] = [
    "volume_id",
    "attribute",
    "matched",
    "correct",
    "accuracy",
    "kappa",
    "unmatched_gold",
    "unmatched_pred",
];

fn report_rows(report: &AccuracyReport) -> Vec<Vec<String>> {
    report
        .attributes
        .iter()
        .map(|a| {
            vec![
                report.volume_id.clone(),
                a.attribute.as_str().to_string(),
                a.matched.to_string(),
                a.correct.to_string(),
                fmt_opt(a.accuracy),
                fmt_opt(a.kappa),
                a.unmatched_gold.to_string(),
                a.unmatched_pred.to_string(),
            ]
        })
        .collect()
}

pub fn cmd_validate(gold: &Path, pred: &Path, out: &Path, fuzzy: bool) -> Result<RunManifest, PipelineError> {
    let mut manifest = RunManifest::new("validate");
    manifest.input("gold", gold);
    manifest.input("pred", pred);
    manifest.config_digest = config_digest(&json!({"command": "validate", "fuzzy_pairs": fuzzy}));
    let gold_file = read_networks(gold)?;
    let pred_file = read_networks(pred)?;
    bad_line_notices(&mut manifest, gold, &gold_file);
    bad_line_notices(&mut manifest, pred, &pred_file);
    let report = score_corpus(&gold_file.networks, &pred_file.networks, fuzzy)?;
    let rows = report
        .per_volume
        .iter()
        .chain(std::iter::once(&report.aggregate))
        .flat_map(report_rows);
    write_table(out, &VALIDATION_HEADER, rows)?;
    manifest.output("report", out);
    manifest.count("shared_volumes", report.per_volume.len());
    manifest.count("gold_only_volumes", report.gold_only_volumes);
    manifest.count("pred_only_volumes", report.pred_only_volumes);
    let first = &report.aggregate.attributes[0];
    manifest.count("matched_pairs", first.matched);
    manifest.count("unmatched_gold", first.unmatched_gold);
    manifest.count("unmatched_pred", first.unmatched_pred);
    manifest.write(&manifest_path(out))?;
    Ok(manifest)
}

// ------------------------------------------------------------------ align

pub fn cmd_align(left: &Path, right: &Path, threshold: f64, out: &Path) -> Result<RunManifest, PipelineError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(PipelineError::Input(format!("threshold {threshold} outside [0, 1]")));
    }
    let mut manifest = RunManifest::new("align");
    manifest.input("left", left);
    manifest.input("right", right);
    manifest.config_digest = config_digest(&json!({"command": "align", "threshold": threshold}));
    let volumes = read_metadata(left)?;
    let catalog = read_metadata(right)?;
    let matches = align_all(&volumes, &catalog, threshold);
    let matched = matches.iter().filter(|m| m.is_some()).count();
    let rows = volumes.iter().zip(&matches).map(|(v, m)| match m {
        Some(m) => [
            v.volume_id.clone(),
            m.catalog_id.clone(),
            m.title_similarity.to_string(),
            m.author_similarity.to_string(),
        ],
        None => [v.volume_id.clone(), String::new(), String::new(), String::new()],
    });
    write_table(
        out,
        &["volume_id", "catalog_id", "title_similarity", "author_similarity"],
        rows,
    )?;
    manifest.output("matches", out);
    manifest.count("volumes", volumes.len());
    manifest.count("catalog_entries", catalog.len());
    manifest.count("matched", matched);
    manifest.count("unmatched", volumes.len() - matched);
    manifest.write(&manifest_path(out))?;
    Ok(manifest)
}
