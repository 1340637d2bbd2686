//! The two recommendation strategies over an embedding store.
//!
//! * functionality-oriented: find stored *methods* whose vectors sit close
//!   to the query method, then recommend their paired tests;
//! * structure-oriented: compare the query directly against stored *tests*
//!   and recommend the close ones.

use serde::Serialize;
use thiserror::Error;

use crate::frontend::{parse_and_validate, FrontendError, UnitKind, DEFAULT_MAX_DEPTH};
use crate::index::{above_threshold, cosine, EmbeddingStore, IndexError};
use crate::model::{code_vector, ModelError, ModelParams};
use crate::pathext::{extract_contexts, PathConfig};
use crate::vocab::Vocabulary;

/// Default similarity floor for matching methods (functionality-oriented):
/// only methods *more than* 90% similar to the query participate.
pub const DEFAULT_TAU_METHOD: f64 = 0.90;
/// Default similarity floor for matching tests (structure-oriented).
pub const DEFAULT_TAU_TEST: f64 = 0.70;
/// Default number of recommendations returned.
pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Error)]
pub enum RecommendError {
    /// The query source could not be turned into an embeddable unit.
    #[error("query rejected: {0}")]
    ParseReject(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}

impl From<FrontendError> for RecommendError {
    fn from(e: FrontendError) -> Self {
        RecommendError::ParseReject(e.to_string())
    }
}

impl From<ModelError> for RecommendError {
    fn from(e: ModelError) -> Self {
        RecommendError::ParseReject(e.to_string())
    }
}

/// One recommended test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    /// 1-based position in the returned ranking.
    pub rank: usize,
    pub test_id: String,
    pub pair_id: String,
    /// Similarity of the recommended test's vector to the query vector.
    pub test_similarity: f64,
    /// For the functionality-oriented strategy: the matched method and its
    /// similarity to the query. Absent for the structure-oriented strategy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via_method_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method_similarity: Option<f64>,
    #[serde(rename = "source")]
    pub test_source: String,
}

/// Machine-readable reason for an empty recommendation list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyReason {
    /// Nothing in the store cleared the similarity threshold.
    NoCandidates,
}

/// A ranked (possibly empty) list of recommendations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendOutcome {
    pub candidates: Vec<Recommendation>,
    /// Present exactly when `candidates` is empty.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<EmptyReason>,
    /// Matched methods whose partner test was absent from the store. A
    /// store built by this toolkit never drops one side of a pair, so this
    /// stays 0 outside of hand-edited stores.
    pub skipped_missing_partner: usize,
}

impl RecommendOutcome {
    fn from_candidates(candidates: Vec<Recommendation>, skipped: usize) -> Self {
        let reason = candidates.is_empty().then_some(EmptyReason::NoCandidates);
        RecommendOutcome {
            candidates,
            reason,
            skipped_missing_partner: skipped,
        }
    }
}

/// Parse, validate and embed query source text with a trained model. The
/// query's own method name is masked during extraction, exactly as stored
/// units were treated.
pub fn embed_query(
    source: &str,
    params: &ModelParams,
    vocab: &Vocabulary,
    path_cfg: &PathConfig,
) -> Result<Vec<f64>, RecommendError> {
    let ast = parse_and_validate(source, DEFAULT_MAX_DEPTH)?;
    let label = ast.method_name().map(str::to_lowercase).unwrap_or_default();
    let bag = extract_contexts(&ast, "Q:query", &label, path_cfg)
        .map_err(|e| RecommendError::ParseReject(e.to_string()))?;
    Ok(code_vector(params, &bag, vocab)?)
}

/// Functionality-oriented recommendation from an already-embedded query.
///
/// Methods with similarity strictly above `tau_method` are matched (the
/// query's own pair can be excluded for leave-one-out evaluation); their
/// partner tests are ranked by the *test* vector's similarity to the
/// query, ties broken by ascending test id, and cut to `k`.
pub fn recommend_functionality_vec(
    query: &[f64],
    store: &EmbeddingStore,
    tau_method: f64,
    k: usize,
    exclude_pair: Option<&str>,
) -> Result<RecommendOutcome, IndexError> {
    let matches = above_threshold(store, query, UnitKind::Method, tau_method)?;
    let mut candidates = Vec::new();
    let mut skipped = 0usize;
    for hit in matches {
        if Some(hit.entry.pair_id.as_str()) == exclude_pair {
            continue;
        }
        let Some(partner) = store.get(&hit.entry.partner_id) else {
            log::warn!(
                "method {} matched but its test {} is not stored; skipping",
                hit.entry.unit_id,
                hit.entry.partner_id
            );
            skipped += 1;
            continue;
        };
        candidates.push(Recommendation {
            rank: 0,
            test_id: partner.unit_id.clone(),
            pair_id: partner.pair_id.clone(),
            test_similarity: cosine(query, &partner.vector)?,
            via_method_id: Some(hit.entry.unit_id.clone()),
            method_similarity: Some(hit.similarity),
            test_source: partner.source_text.clone(),
        });
    }
    rank_and_cut(&mut candidates, k);
    Ok(RecommendOutcome::from_candidates(candidates, skipped))
}

/// Structure-oriented recommendation from an already-embedded query: tests
/// strictly above `tau_test`, ranked by similarity, ties by ascending id.
pub fn recommend_structure_vec(
    query: &[f64],
    store: &EmbeddingStore,
    tau_test: f64,
    k: usize,
    exclude_pair: Option<&str>,
) -> Result<RecommendOutcome, IndexError> {
    let matches = above_threshold(store, query, UnitKind::Test, tau_test)?;
    let mut candidates = Vec::new();
    for hit in matches {
        if Some(hit.entry.pair_id.as_str()) == exclude_pair {
            continue;
        }
        candidates.push(Recommendation {
            rank: 0,
            test_id: hit.entry.unit_id.clone(),
            pair_id: hit.entry.pair_id.clone(),
            test_similarity: hit.similarity,
            via_method_id: None,
            method_similarity: None,
            test_source: hit.entry.source_text.clone(),
        });
    }
    rank_and_cut(&mut candidates, k);
    Ok(RecommendOutcome::from_candidates(candidates, 0))
}

/// Functionality-oriented recommendation for raw query source.
pub fn recommend_functionality(
    query_source: &str,
    store: &EmbeddingStore,
    params: &ModelParams,
    vocab: &Vocabulary,
    path_cfg: &PathConfig,
    tau_method: f64,
    k: usize,
) -> Result<RecommendOutcome, RecommendError> {
    let query = embed_query(query_source, params, vocab, path_cfg)?;
    Ok(recommend_functionality_vec(&query, store, tau_method, k, None)?)
}

/// Structure-oriented recommendation for raw query source.
pub fn recommend_structure(
    query_source: &str,
    store: &EmbeddingStore,
    params: &ModelParams,
    vocab: &Vocabulary,
    path_cfg: &PathConfig,
    tau_test: f64,
    k: usize,
) -> Result<RecommendOutcome, RecommendError> {
    let query = embed_query(query_source, params, vocab, path_cfg)?;
    Ok(recommend_structure_vec(&query, store, tau_test, k, None)?)
}

fn rank_and_cut(candidates: &mut Vec<Recommendation>, k: usize) {
    candidates.sort_by(|a, b| {
        b.test_similarity
            .total_cmp(&a.test_similarity)
            .then_with(|| a.test_id.cmp(&b.test_id))
    });
    candidates.truncate(k);
    for (i, c) in candidates.iter_mut().enumerate() {
        c.rank = i + 1;
    }
}
