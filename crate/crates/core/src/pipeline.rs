//! The end-to-end stages behind the command-line interface:
//! ingest -> train -> embed -> recommend / eval / export.
//!
//! Every stage takes the run configuration, reads the previous stage's
//! artifact, and writes its own under the run directory. Artifacts carry
//! the configuration stamp so stages refuse mismatched inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::corpus::{prepare_corpus, read_corpus, training_bags, CorpusPair, PreparedPair};
use crate::eval::{build_report, radar_csv, EvalReport};
use crate::index::{build_store, EmbeddingStore};
use crate::model::{load_model, save_model, train, SavedModel, TrainError};
use crate::recommend::{
    embed_query, recommend_functionality_vec, recommend_structure_vec, RecommendError,
    RecommendOutcome,
};
use crate::eval::Approach;
use crate::vocab::Vocabulary;

/// File names fixed under the run directory.
pub const ACCEPTED_FILE: &str = "accepted.jsonl";
pub const REJECTIONS_FILE: &str = "rejections.log";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const RADAR_ALL_FILE: &str = "radar_all.csv";
pub const RADAR_APPROACH1_FILE: &str = "radar_approach1.csv";
pub const RADAR_APPROACH2_FILE: &str = "radar_approach2.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// How a failure maps onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad invocation or configuration (exit 1).
    Usage,
    /// Bad or missing data/artifacts (exit 2).
    Data,
    /// A broken internal invariant (exit 3).
    Internal,
}

#[derive(Debug)]
pub struct PipelineError {
    pub kind: ErrorKind,
    pub message: String,
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for PipelineError {}

impl PipelineError {
    pub fn usage(message: impl Into<String>) -> Self {
        PipelineError { kind: ErrorKind::Usage, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        PipelineError { kind: ErrorKind::Data, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        PipelineError { kind: ErrorKind::Internal, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Internal => 3,
        }
    }
}

impl From<crate::config::ConfigError> for PipelineError {
    fn from(e: crate::config::ConfigError) -> Self {
        PipelineError::usage(e.to_string())
    }
}

fn io_data(path: &Path, what: &str, e: std::io::Error) -> PipelineError {
    PipelineError::data(format!("cannot {what} {}: {e}", path.display()))
}

/// Fail with a pointer at the command that produces a missing artifact.
fn require_artifact(path: &Path, producer: &str) -> Result<(), PipelineError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(PipelineError::data(format!(
            "missing artifact {}: run `testrec {producer}` first",
            path.display()
        )))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_data(parent, "create directory", e))?;
        }
    }
    fs::write(path, bytes).map_err(|e| io_data(path, "write", e))
}

// ---- ingest ---------------------------------------------------------------

#[derive(Debug)]
pub struct IngestSummary {
    pub accepted: usize,
    pub rejected: usize,
    pub accepted_path: PathBuf,
    pub rejections_path: PathBuf,
}

/// Read the raw corpus, keep the pairs that fully parse and extract, and
/// write the cleaned corpus plus a per-rejection reason log.
pub fn run_ingest(cfg: &RunConfig) -> Result<IngestSummary, PipelineError> {
    let read = read_corpus(&cfg.paths.corpus).map_err(|e| {
        PipelineError::data(format!(
            "cannot read corpus {}: {e}; point [paths].corpus or --corpus at a JSONL file",
            cfg.paths.corpus.display()
        ))
    })?;
    let (prepared, prep_rejections) = prepare_corpus(&read.pairs, &cfg.pathext);

    let mut accepted_lines = String::new();
    for p in &prepared {
        let pair = CorpusPair {
            id: p.pair_id.clone(),
            focal_method: p.method.unit.text.clone(),
            test_case: p.test.unit.text.clone(),
        };
        accepted_lines.push_str(
            &serde_json::to_string(&pair)
                .map_err(|e| PipelineError::internal(format!("serialize pair: {e}")))?,
        );
        accepted_lines.push('\n');
    }
    let mut rejection_lines = String::new();
    for r in read.rejections.iter().chain(&prep_rejections) {
        rejection_lines.push_str(&r.to_string());
        rejection_lines.push('\n');
    }

    let accepted_path = cfg.paths.in_out_dir(ACCEPTED_FILE);
    let rejections_path = cfg.paths.in_out_dir(REJECTIONS_FILE);
    write_file(&accepted_path, accepted_lines.as_bytes())?;
    write_file(&rejections_path, rejection_lines.as_bytes())?;

    let rejected = read.rejections.len() + prep_rejections.len();
    info!(
        "ingest: {} accepted, {} rejected -> {}",
        prepared.len(),
        rejected,
        accepted_path.display()
    );
    Ok(IngestSummary {
        accepted: prepared.len(),
        rejected,
        accepted_path,
        rejections_path,
    })
}

/// Load the cleaned corpus written by `ingest` and prepare it again.
fn load_prepared(cfg: &RunConfig) -> Result<Vec<PreparedPair>, PipelineError> {
    let accepted = cfg.paths.in_out_dir(ACCEPTED_FILE);
    require_artifact(&accepted, "ingest")?;
    let read = read_corpus(&accepted).map_err(|e| io_data(&accepted, "read", e))?;
    if !read.rejections.is_empty() {
        return Err(PipelineError::data(format!(
            "cleaned corpus {} no longer parses ({} bad lines); rerun `testrec ingest`",
            accepted.display(),
            read.rejections.len()
        )));
    }
    let (prepared, rejections) = prepare_corpus(&read.pairs, &cfg.pathext);
    for r in &rejections {
        warn!("accepted pair failed preparation: {r}");
    }
    if !rejections.is_empty() {
        return Err(PipelineError::data(format!(
            "{} accepted pairs failed preparation; rerun `testrec ingest` with the current config",
            rejections.len()
        )));
    }
    Ok(prepared)
}

fn stamp_of(cfg: &RunConfig) -> [u8; 32] {
    let hex = cfg.artifact_hash();
    let mut out = [0u8; 32];
    for (i, chunk) in hex.as_bytes().chunks(2).enumerate().take(32) {
        let s = std::str::from_utf8(chunk).expect("hash is ascii");
        out[i] = u8::from_str_radix(s, 16).expect("hash is hex");
    }
    out
}

fn check_stamp(cfg: &RunConfig, found: &[u8; 32], artifact: &str, producer: &str) -> Result<(), PipelineError> {
    if *found != stamp_of(cfg) {
        return Err(PipelineError::data(format!(
            "{artifact} was produced under a different configuration; rerun `testrec {producer}`",
        )));
    }
    Ok(())
}

// ---- train ----------------------------------------------------------------

#[derive(Debug)]
pub struct TrainSummary {
    pub pairs: usize,
    pub bags: usize,
    pub epoch_mean_loss: Vec<f64>,
    pub vocab_path: PathBuf,
    pub model_path: PathBuf,
}

/// Build the vocabulary and train the attention network on the cleaned
/// corpus; write both artifacts.
pub fn run_train(cfg: &RunConfig) -> Result<TrainSummary, PipelineError> {
    let prepared = load_prepared(cfg)?;
    let bags = training_bags(&prepared);
    let vocab = Vocabulary::build(&bags, cfg.vocab.min_count).map_err(|e| {
        PipelineError::data(format!("cannot build vocabulary: {e}"))
    })?;
    let model_cfg = cfg.model_config();
    let outcome = train(&bags, &vocab, &model_cfg).map_err(|e| match e {
        TrainError::EmptyCorpus => PipelineError::data(e.to_string()),
        TrainError::Model(_) => PipelineError::usage(e.to_string()),
    })?;

    let vocab_path = cfg.paths.vocab_path();
    if let Some(parent) = vocab_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_data(parent, "create directory", e))?;
        }
    }
    vocab
        .save(&vocab_path)
        .map_err(|e| PipelineError::data(format!("cannot write vocabulary: {e}")))?;
    let model_path = cfg.paths.model_path();
    if let Some(parent) = model_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_data(parent, "create directory", e))?;
        }
    }
    save_model(&model_path, &outcome.params, &model_cfg, &vocab, &stamp_of(cfg))
        .map_err(|e| PipelineError::data(format!("cannot write model: {e}")))?;
    info!(
        "train: {} bags, final mean loss {:.6} -> {}",
        bags.len(),
        outcome.epoch_mean_loss.last().copied().unwrap_or(f64::NAN),
        model_path.display()
    );
    Ok(TrainSummary {
        pairs: prepared.len(),
        bags: bags.len(),
        epoch_mean_loss: outcome.epoch_mean_loss,
        vocab_path,
        model_path,
    })
}

/// Load vocabulary + model, verifying the configuration stamp.
fn load_trained(cfg: &RunConfig) -> Result<(Vocabulary, SavedModel), PipelineError> {
    let vocab_path = cfg.paths.vocab_path();
    require_artifact(&vocab_path, "train")?;
    let vocab = Vocabulary::load(&vocab_path)
        .map_err(|e| PipelineError::data(format!("cannot load vocabulary: {e}")))?;
    let model_path = cfg.paths.model_path();
    require_artifact(&model_path, "train")?;
    let model = load_model(&model_path, &vocab)
        .map_err(|e| PipelineError::data(format!("cannot load model: {e}")))?;
    check_stamp(cfg, &model.run_stamp, "model", "train")?;
    Ok((vocab, model))
}

// ---- embed ----------------------------------------------------------------

#[derive(Debug)]
pub struct EmbedSummary {
    pub entries: usize,
    pub dropped: usize,
    pub store_path: PathBuf,
}

/// Embed every cleaned pair with the trained model and write the store.
pub fn run_embed(cfg: &RunConfig) -> Result<EmbedSummary, PipelineError> {
    let prepared = load_prepared(cfg)?;
    let (vocab, model) = load_trained(cfg)?;
    let report = build_store(&prepared, &model.params, &vocab)
        .map_err(|e| PipelineError::data(format!("cannot embed corpus: {e}")))?;
    for r in &report.dropped {
        warn!("embed: dropped pair: {r}");
    }
    let store_path = cfg.paths.store_path();
    if let Some(parent) = store_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_data(parent, "create directory", e))?;
        }
    }
    report
        .store
        .save(&store_path, &stamp_of(cfg))
        .map_err(|e| PipelineError::data(format!("cannot write store: {e}")))?;
    info!(
        "embed: {} entries ({} pairs dropped) -> {}",
        report.store.len(),
        report.dropped.len(),
        store_path.display()
    );
    Ok(EmbedSummary {
        entries: report.store.len(),
        dropped: report.dropped.len(),
        store_path,
    })
}

/// Load the store, verifying the configuration stamp.
fn load_store(cfg: &RunConfig) -> Result<EmbeddingStore, PipelineError> {
    let store_path = cfg.paths.store_path();
    require_artifact(&store_path, "embed")?;
    let (store, stamp) = EmbeddingStore::load(&store_path)
        .map_err(|e| PipelineError::data(format!("cannot load store: {e}")))?;
    check_stamp(cfg, &stamp, "store", "embed")?;
    Ok(store)
}

// ---- recommend ------------------------------------------------------------

/// Machine-readable recommendation output.
#[derive(Debug, serde::Serialize)]
pub struct RecommendReport {
    pub approach: u8,
    pub config_hash: String,
    pub outcome: RecommendOutcome,
}

/// Run one strategy for raw query source against the stored corpus.
pub fn run_recommend(
    cfg: &RunConfig,
    query_source: &str,
    approach: Approach,
) -> Result<RecommendReport, PipelineError> {
    let (vocab, model) = load_trained(cfg)?;
    let store = load_store(cfg)?;
    let query = embed_query(query_source, &model.params, &vocab, &cfg.pathext).map_err(
        |e| match e {
            RecommendError::ParseReject(detail) => {
                let excerpt: String = query_source.chars().take(80).collect();
                PipelineError::data(format!("query rejected: {detail}; query began: {excerpt:?}"))
            }
            RecommendError::Index(e) => PipelineError::internal(e.to_string()),
        },
    )?;
    let outcome = match approach {
        Approach::Functionality => recommend_functionality_vec(
            &query,
            &store,
            cfg.recommend.tau_method,
            cfg.recommend.k,
            None,
        ),
        Approach::Structure => recommend_structure_vec(
            &query,
            &store,
            cfg.recommend.tau_test,
            cfg.recommend.k,
            None,
        ),
    }
    .map_err(|e| PipelineError::internal(e.to_string()))?;
    Ok(RecommendReport {
        approach: approach.number(),
        config_hash: cfg.config_hash(),
        outcome,
    })
}

/// Human-readable rendering of a recommendation report.
pub fn render_recommendations(report: &RecommendReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "approach {} recommendations (config {})\n",
        report.approach,
        &report.config_hash[..12.min(report.config_hash.len())]
    ));
    if report.outcome.candidates.is_empty() {
        out.push_str("no candidates cleared the similarity threshold\n");
        return out;
    }
    for c in &report.outcome.candidates {
        out.push_str(&format!("#{} {} (test similarity {:.4}", c.rank, c.test_id, c.test_similarity));
        if let (Some(m), Some(ms)) = (&c.via_method_id, c.method_similarity) {
            out.push_str(&format!("; via {m} at {ms:.4}"));
        }
        out.push_str(")\n");
        for line in c.test_source.lines() {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
    }
    if report.outcome.skipped_missing_partner > 0 {
        out.push_str(&format!(
            "skipped {} matched methods with no stored test\n",
            report.outcome.skipped_missing_partner
        ));
    }
    out
}

// ---- eval and exports -----------------------------------------------------

#[derive(Debug)]
pub struct EvalArtifacts {
    pub report: EvalReport,
    pub report_text: String,
    /// Files written under the run directory.
    pub files: Vec<PathBuf>,
}

/// Full evaluation: both strategies, statistics tables, radar and
/// histogram exports, and a manifest of everything written.
pub fn run_eval(cfg: &RunConfig) -> Result<EvalArtifacts, PipelineError> {
    let store = load_store(cfg)?;
    let report = build_report(&store, &cfg.eval_options(), &cfg.config_hash())
        .map_err(|e| PipelineError::internal(format!("evaluation failed: {e}")))?;

    let report_text = crate::eval::render_text(&report);
    let report_json = serde_json::to_string_pretty(&report)
        .map_err(|e| PipelineError::internal(format!("serialize report: {e}")))?
        + "\n";

    let radar_all = radar_csv(
        report
            .all_samples
            .as_ref()
            .map(|p| p.radar.as_slice())
            .unwrap_or(&[]),
    );
    let radar_a1 = radar_csv(&report.approach1.radar_rows());
    let radar_a2 = radar_csv(&report.approach2.radar_rows());
    let histogram = crate::eval::histogram_csv(&store)
        .map_err(|e| PipelineError::internal(format!("histogram failed: {e}")))?;

    let outputs: Vec<(&str, Vec<u8>)> = vec![
        (REPORT_TEXT_FILE, report_text.clone().into_bytes()),
        (REPORT_JSON_FILE, report_json.into_bytes()),
        (RADAR_ALL_FILE, radar_all.into_bytes()),
        (RADAR_APPROACH1_FILE, radar_a1.into_bytes()),
        (RADAR_APPROACH2_FILE, radar_a2.into_bytes()),
        (HISTOGRAM_FILE, histogram.into_bytes()),
    ];
    let mut files = Vec::new();
    let mut manifest: BTreeMap<String, String> = BTreeMap::new();
    manifest.insert("config_hash".to_string(), cfg.config_hash());
    for (name, bytes) in &outputs {
        let path = cfg.paths.in_out_dir(name);
        write_file(&path, bytes)?;
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        manifest.insert((*name).to_string(), hex);
        files.push(path);
    }
    let manifest_path = cfg.paths.in_out_dir(MANIFEST_FILE);
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| PipelineError::internal(format!("serialize manifest: {e}")))?
        + "\n";
    write_file(&manifest_path, manifest_json.as_bytes())?;
    files.push(manifest_path);

    info!("eval: wrote {} files under {}", files.len(), cfg.paths.out_dir.display());
    Ok(EvalArtifacts { report, report_text, files })
}

/// Standalone radar export (the all-samples population).
pub fn run_export_radar(cfg: &RunConfig) -> Result<PathBuf, PipelineError> {
    let store = load_store(cfg)?;
    let rows = match crate::eval::pairwise_stats(&store, cfg.recommend.tau_method) {
        Ok(p) => p.radar,
        Err(crate::eval::StatsError::NoPairs) => Vec::new(),
        Err(crate::eval::StatsError::Index(e)) => {
            return Err(PipelineError::internal(e.to_string()))
        }
    };
    let path = cfg.paths.in_out_dir(RADAR_ALL_FILE);
    write_file(&path, radar_csv(&rows).as_bytes())?;
    Ok(path)
}

/// Standalone histogram export.
pub fn run_export_histogram(cfg: &RunConfig) -> Result<PathBuf, PipelineError> {
    let store = load_store(cfg)?;
    let csv = crate::eval::histogram_csv(&store)
        .map_err(|e| PipelineError::internal(e.to_string()))?;
    let path = cfg.paths.in_out_dir(HISTOGRAM_FILE);
    write_file(&path, csv.as_bytes())?;
    Ok(path)
}
