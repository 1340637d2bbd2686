//! Embedding store and exact cosine-similarity retrieval.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use log::warn;
use thiserror::Error;

use crate::corpus::{PairRejection, PreparedPair};
use crate::frontend::UnitKind;
use crate::model::{code_vector, ModelParams};
use crate::persist::*;
use crate::vocab::Vocabulary;

const MAGIC: &[u8; 8] = b"TRSTORE\0";
const VERSION: u32 = 1;
const MAX_TEXT: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("cosine similarity of a zero vector is undefined")]
    ZeroVector,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("store integrity violation: {0}")]
    Integrity(String),
    #[error("store file format error: {0}")]
    Format(String),
    #[error("unsupported store file version {0} (supported: {VERSION})")]
    Version(u32),
    #[error("failed to read or write store file: {0}")]
    Io(#[from] std::io::Error),
}

/// Cosine similarity, clamped into [-1, 1] so downstream threshold logic
/// never sees a rounding artifact like 1.0000000000000002.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, IndexError> {
    if u.len() != v.len() {
        return Err(IndexError::DimensionMismatch { left: u.len(), right: v.len() });
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(IndexError::ZeroVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// One embedded unit: its vector, its pair, its partner on the other side
/// of the pair, and the original source (kept for edit-distance metrics
/// and for showing recommendations).
#[derive(Debug, Clone, PartialEq)]
pub struct StoreEntry {
    pub unit_id: String,
    pub pair_id: String,
    pub kind: UnitKind,
    pub partner_id: String,
    pub source_text: String,
    pub vector: Vec<f64>,
}

/// All embedded units of a corpus, retrievable by id and scannable in
/// deterministic (ascending unit id) order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dimension: usize,
    entries: Vec<StoreEntry>,
    by_id: BTreeMap<String, usize>,
}

impl EmbeddingStore {
    /// Build from entries, enforcing the store invariants: consistent
    /// dimension, finite values, unique unit ids, and partner links that
    /// are mutual and cross-kind.
    pub fn from_entries(
        dimension: usize,
        mut entries: Vec<StoreEntry>,
    ) -> Result<Self, IndexError> {
        entries.sort_by(|a, b| a.unit_id.cmp(&b.unit_id));
        let mut by_id = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.vector.len() != dimension {
                return Err(IndexError::Integrity(format!(
                    "entry {} has dimension {} (store is {dimension})",
                    e.unit_id,
                    e.vector.len()
                )));
            }
            if e.vector.iter().any(|v| !v.is_finite()) {
                return Err(IndexError::Integrity(format!(
                    "entry {} contains a non-finite value",
                    e.unit_id
                )));
            }
            if by_id.insert(e.unit_id.clone(), i).is_some() {
                return Err(IndexError::Integrity(format!("duplicate unit id {}", e.unit_id)));
            }
        }
        for e in &entries {
            let Some(&pi) = by_id.get(&e.partner_id) else {
                return Err(IndexError::Integrity(format!(
                    "entry {} links to missing partner {}",
                    e.unit_id, e.partner_id
                )));
            };
            let partner = &entries[pi];
            if partner.kind == e.kind || partner.partner_id != e.unit_id
                || partner.pair_id != e.pair_id
            {
                return Err(IndexError::Integrity(format!(
                    "entries {} and {} are not mutual cross-kind partners",
                    e.unit_id, e.partner_id
                )));
            }
        }
        Ok(EmbeddingStore { dimension, entries, by_id })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending unit-id order.
    pub fn entries(&self) -> &[StoreEntry] {
        &self.entries
    }

    pub fn get(&self, unit_id: &str) -> Option<&StoreEntry> {
        self.by_id.get(unit_id).map(|&i| &self.entries[i])
    }

    /// Write the store with the hash of the run configuration that
    /// produced it; loaders compare the stamp against their own config.
    pub fn save(&self, path: &Path, run_stamp: &[u8; 32]) -> Result<(), IndexError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        write_u32(&mut w, VERSION)?;
        w.write_all(run_stamp)?;
        write_u32(&mut w, self.dimension as u32)?;
        write_u32(&mut w, self.entries.len() as u32)?;
        for e in &self.entries {
            write_str(&mut w, &e.unit_id)?;
            write_str(&mut w, &e.pair_id)?;
            write_u8(&mut w, match e.kind {
                UnitKind::Method => 0,
                UnitKind::Test => 1,
            })?;
            write_str(&mut w, &e.partner_id)?;
            write_str(&mut w, &e.source_text)?;
            write_f64_slice(&mut w, &e.vector)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, [u8; 32]), IndexError> {
        let mut r = BufReader::new(File::open(path)?);
        if !expect_magic(&mut r, MAGIC)? {
            return Err(IndexError::Format("bad magic; not a store file".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(IndexError::Version(version));
        }
        let run_stamp: [u8; 32] = read_array(&mut r)?;
        let dimension = read_u32(&mut r)? as usize;
        let count = read_u32(&mut r)? as usize;
        let mut entries = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let unit_id = read_str(&mut r, MAX_TEXT)?;
            let pair_id = read_str(&mut r, MAX_TEXT)?;
            let kind = match read_u8(&mut r)? {
                0 => UnitKind::Method,
                1 => UnitKind::Test,
                other => {
                    return Err(IndexError::Format(format!("unknown unit kind tag {other}")))
                }
            };
            let partner_id = read_str(&mut r, MAX_TEXT)?;
            let source_text = read_str(&mut r, MAX_TEXT)?;
            let vector = read_f64_vec(&mut r, dimension)?;
            entries.push(StoreEntry { unit_id, pair_id, kind, partner_id, source_text, vector });
        }
        let mut trailer = [0u8; 1];
        if r.read(&mut trailer)? != 0 {
            return Err(IndexError::Format("trailing bytes after entries".into()));
        }
        Ok((Self::from_entries(dimension, entries)?, run_stamp))
    }
}

/// Search hit: an entry and its similarity to the query.
#[derive(Debug, Clone, PartialEq)]
pub struct Hit<'a> {
    pub entry: &'a StoreEntry,
    pub similarity: f64,
}

fn scan<'a>(
    store: &'a EmbeddingStore,
    query: &[f64],
    kind: UnitKind,
) -> Result<Vec<Hit<'a>>, IndexError> {
    if query.len() != store.dimension() {
        return Err(IndexError::DimensionMismatch {
            left: query.len(),
            right: store.dimension(),
        });
    }
    let mut hits = Vec::new();
    for entry in store.entries() {
        if entry.kind != kind {
            continue;
        }
        hits.push(Hit { entry, similarity: cosine(query, &entry.vector)? });
    }
    // Descending similarity; equal similarities resolve to ascending
    // unit id (entries() is already id-sorted and the sort is stable).
    hits.sort_by(|a, b| b.similarity.total_cmp(&a.similarity));
    Ok(hits)
}

/// The `k` entries of `kind` most similar to `query`, ties broken by
/// ascending unit id. Exact linear scan.
pub fn top_k<'a>(
    store: &'a EmbeddingStore,
    query: &[f64],
    kind: UnitKind,
    k: usize,
) -> Result<Vec<Hit<'a>>, IndexError> {
    let mut hits = scan(store, query, kind)?;
    hits.truncate(k);
    Ok(hits)
}

/// Every entry of `kind` with similarity strictly above `threshold`,
/// ordered like [`top_k`].
pub fn above_threshold<'a>(
    store: &'a EmbeddingStore,
    query: &[f64],
    kind: UnitKind,
    threshold: f64,
) -> Result<Vec<Hit<'a>>, IndexError> {
    let mut hits = scan(store, query, kind)?;
    hits.retain(|h| h.similarity > threshold);
    Ok(hits)
}

/// Outcome of embedding a prepared corpus.
#[derive(Debug)]
pub struct BuildReport {
    pub store: EmbeddingStore,
    /// Pairs dropped because a side could not be embedded.
    pub dropped: Vec<PairRejection>,
}

/// Embed every prepared pair with the trained model. A pair whose either
/// side fails to embed contributes no entries at all; the failure is
/// logged and reported.
pub fn build_store(
    pairs: &[PreparedPair],
    params: &ModelParams,
    vocab: &Vocabulary,
) -> Result<BuildReport, IndexError> {
    let mut entries = Vec::with_capacity(pairs.len() * 2);
    let mut dropped = Vec::new();
    for pair in pairs {
        let method_vec = code_vector(params, &pair.method.bag, vocab);
        let test_vec = code_vector(params, &pair.test.bag, vocab);
        match (method_vec, test_vec) {
            (Ok(mv), Ok(tv)) => {
                entries.push(StoreEntry {
                    unit_id: pair.method.unit.id.clone(),
                    pair_id: pair.pair_id.clone(),
                    kind: UnitKind::Method,
                    partner_id: pair.test.unit.id.clone(),
                    source_text: pair.method.unit.text.clone(),
                    vector: mv,
                });
                entries.push(StoreEntry {
                    unit_id: pair.test.unit.id.clone(),
                    pair_id: pair.pair_id.clone(),
                    kind: UnitKind::Test,
                    partner_id: pair.method.unit.id.clone(),
                    source_text: pair.test.unit.text.clone(),
                    vector: tv,
                });
            }
            (m, t) => {
                let (side, err) = match (m, t) {
                    (Err(e), _) => (UnitKind::Method, e),
                    (_, Err(e)) => (UnitKind::Test, e),
                    _ => unreachable!("one side must have failed"),
                };
                let rejection = PairRejection {
                    line: None,
                    pair_id: Some(pair.pair_id.clone()),
                    side: Some(side),
                    reason: format!("embedding failed: {err}"),
                };
                warn!("dropping pair: {rejection}");
                dropped.push(rejection);
            }
        }
    }
    let dimension = params.code_dim();
    Ok(BuildReport { store: EmbeddingStore::from_entries(dimension, entries)?, dropped })
}
