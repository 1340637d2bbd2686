//! Frequency-ranked vocabularies mapping terminal values, path hashes and
//! labels to embedding-table rows.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pathext::ContextBag;

/// Row reserved for values never seen (or pruned) at build time.
pub const OOV_INDEX: u32 = 0;
/// Row reserved for padding; never produced by lookups.
pub const PAD_INDEX: u32 = 1;
/// First row handed to a real vocabulary entry.
const FIRST_REAL_INDEX: u32 = 2;

const MAGIC: &str = "TRVOCAB";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("empty corpus: no context bags to build a vocabulary from")]
    EmptyCorpus,
    #[error("vocabulary file format error: {0}")]
    Format(String),
    #[error("unsupported vocabulary file version {0} (supported: {VERSION})")]
    Version(u32),
    #[error("failed to read or write vocabulary file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct Entry {
    index: u32,
    count: u64,
}

/// Three vocabularies built in one pass: terminal values (path-context
/// endpoints), path hashes, and training labels (method names).
///
/// Index 0 is out-of-vocabulary, index 1 is padding; real entries start at
/// 2, ordered by descending count, ties broken by ascending key, so the
/// assignment is a pure function of the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    values: BTreeMap<String, Entry>,
    paths: BTreeMap<u64, Entry>,
    labels: BTreeMap<String, Entry>,
    min_count: u64,
}

impl Vocabulary {
    /// Count every value, path and label across `bags` and rank them.
    /// Entries appearing fewer than `min_count` times are dropped (their
    /// lookups fall back to [`OOV_INDEX`]).
    pub fn build(bags: &[ContextBag], min_count: u64) -> Result<Self, VocabError> {
        if bags.is_empty() {
            return Err(VocabError::EmptyCorpus);
        }
        let mut value_counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut path_counts: BTreeMap<u64, u64> = BTreeMap::new();
        let mut label_counts: BTreeMap<String, u64> = BTreeMap::new();
        for bag in bags {
            *label_counts.entry(bag.label.clone()).or_default() += 1;
            for ctx in &bag.contexts {
                *value_counts.entry(ctx.source_value.clone()).or_default() += 1;
                *value_counts.entry(ctx.target_value.clone()).or_default() += 1;
                *path_counts.entry(ctx.path_hash).or_default() += 1;
            }
        }
        Ok(Vocabulary {
            values: rank(value_counts, min_count),
            paths: rank(path_counts, min_count),
            labels: rank(label_counts, min_count),
            min_count,
        })
    }

    pub fn lookup_value(&self, value: &str) -> u32 {
        self.values.get(value).map_or(OOV_INDEX, |e| e.index)
    }

    pub fn lookup_path(&self, hash: u64) -> u32 {
        self.paths.get(&hash).map_or(OOV_INDEX, |e| e.index)
    }

    pub fn lookup_label(&self, label: &str) -> u32 {
        self.labels.get(label).map_or(OOV_INDEX, |e| e.index)
    }

    /// Label string for a row index (linear scan; used for reporting only).
    pub fn label_for_index(&self, index: u32) -> Option<&str> {
        self.labels
            .iter()
            .find(|(_, e)| e.index == index)
            .map(|(k, _)| k.as_str())
    }

    /// Embedding-table sizes include the two reserved rows.
    pub fn value_table_len(&self) -> usize {
        self.values.len() + FIRST_REAL_INDEX as usize
    }

    pub fn path_table_len(&self) -> usize {
        self.paths.len() + FIRST_REAL_INDEX as usize
    }

    pub fn label_table_len(&self) -> usize {
        self.labels.len() + FIRST_REAL_INDEX as usize
    }

    /// Serialized form; stable byte-for-byte for equal vocabularies.
    pub fn to_bytes(&self) -> Vec<u8> {
        let file = VocabFile {
            magic: MAGIC.to_string(),
            version: VERSION,
            min_count: self.min_count,
            values: to_rows(&self.values, |k| k.clone()),
            paths: to_rows(&self.paths, |k| *k),
            labels: to_rows(&self.labels, |k| k.clone()),
        };
        let mut bytes = serde_json::to_vec_pretty(&file).expect("vocabulary serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, VocabError> {
        let file: VocabFile = serde_json::from_slice(bytes)
            .map_err(|e| VocabError::Format(e.to_string()))?;
        if file.magic != MAGIC {
            return Err(VocabError::Format(format!("bad magic {:?}", file.magic)));
        }
        if file.version != VERSION {
            return Err(VocabError::Version(file.version));
        }
        Ok(Vocabulary {
            values: from_rows(file.values, VocabError::Format)?,
            paths: from_rows(file.paths, VocabError::Format)?,
            labels: from_rows(file.labels, VocabError::Format)?,
            min_count: file.min_count,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), VocabError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, VocabError> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// SHA-256 over the serialized form; models remember it so they can
    /// refuse to run against a different vocabulary.
    pub fn content_hash(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }
}

fn rank<K: Ord + Clone>(counts: BTreeMap<K, u64>, min_count: u64) -> BTreeMap<K, Entry> {
    let mut items: Vec<(K, u64)> =
        counts.into_iter().filter(|&(_, c)| c >= min_count.max(1)).collect();
    // Descending count; the BTreeMap source already yields ascending keys,
    // and the sort is stable, so ties resolve to ascending key order.
    items.sort_by(|a, b| b.1.cmp(&a.1));
    items
        .into_iter()
        .enumerate()
        .map(|(i, (k, count))| {
            (k, Entry { index: FIRST_REAL_INDEX + i as u32, count })
        })
        .collect()
}

fn to_rows<K: Ord, R: Clone>(map: &BTreeMap<K, Entry>, key: impl Fn(&K) -> R) -> Vec<(R, u32, u64)> {
    let mut rows: Vec<(R, u32, u64)> =
        map.iter().map(|(k, e)| (key(k), e.index, e.count)).collect();
    rows.sort_by_key(|r| r.1);
    rows
}

fn from_rows<K: Ord>(
    rows: Vec<(K, u32, u64)>,
    err: impl Fn(String) -> VocabError,
) -> Result<BTreeMap<K, Entry>, VocabError> {
    let mut map = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::new();
    for (k, index, count) in rows {
        if index < FIRST_REAL_INDEX {
            return Err(err(format!("entry uses reserved index {index}")));
        }
        if !seen.insert(index) {
            return Err(err(format!("duplicate index {index}")));
        }
        if map.insert(k, Entry { index, count }).is_some() {
            return Err(err("duplicate key".to_string()));
        }
    }
    Ok(map)
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    magic: String,
    version: u32,
    min_count: u64,
    values: Vec<(String, u32, u64)>,
    paths: Vec<(u64, u32, u64)>,
    labels: Vec<(String, u32, u64)>,
}
