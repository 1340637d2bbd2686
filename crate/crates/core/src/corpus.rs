//! JSON-Lines corpus of ⟨focal method, test case⟩ pairs and its
//! conversion into labeled context bags.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::frontend::{parse_and_validate, SourceUnit, UnitKind, DEFAULT_MAX_DEPTH};
use crate::pathext::{extract_contexts, ContextBag, PathConfig};

/// One corpus line: `{"id": ..., "focal_method": ..., "test_case": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPair {
    pub id: String,
    pub focal_method: String,
    pub test_case: String,
}

/// A source unit that survived the frontend, with its context bag.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedUnit {
    pub unit: SourceUnit,
    pub bag: ContextBag,
}

/// A pair whose two sides both parsed, validated and produced contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedPair {
    pub pair_id: String,
    pub method: PreparedUnit,
    pub test: PreparedUnit,
}

/// Why a line or pair was dropped. One side failing drops the whole pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairRejection {
    pub line: Option<usize>,
    pub pair_id: Option<String>,
    pub side: Option<UnitKind>,
    pub reason: String,
}

impl std::error::Error for PairRejection {}

impl fmt::Display for PairRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: ")?,
            None => {}
        }
        match &self.pair_id {
            Some(id) => write!(f, "pair {id}: ")?,
            None => {}
        }
        match self.side {
            Some(UnitKind::Method) => write!(f, "focal method: ")?,
            Some(UnitKind::Test) => write!(f, "test case: ")?,
            None => {}
        }
        write!(f, "{}", self.reason)
    }
}

/// Everything read from one corpus file.
#[derive(Debug)]
pub struct CorpusRead {
    pub pairs: Vec<CorpusPair>,
    pub rejections: Vec<PairRejection>,
}

/// Read a JSON-Lines corpus. Unparseable lines and duplicate pair ids
/// become rejections, not errors; only I/O failure aborts.
pub fn read_corpus(path: &Path) -> std::io::Result<CorpusRead> {
    let text = fs::read_to_string(path)?;
    let mut pairs: Vec<CorpusPair> = Vec::new();
    let mut rejections = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CorpusPair>(line) {
            Ok(pair) => {
                if !seen.insert(pair.id.clone()) {
                    rejections.push(PairRejection {
                        line: Some(line_no),
                        pair_id: Some(pair.id.clone()),
                        side: None,
                        reason: "duplicate pair id".into(),
                    });
                    continue;
                }
                pairs.push(pair);
            }
            Err(e) => rejections.push(PairRejection {
                line: Some(line_no),
                pair_id: None,
                side: None,
                reason: format!("malformed JSON line: {e}"),
            }),
        }
    }
    Ok(CorpusRead { pairs, rejections })
}

fn prepare_unit(
    pair_id: &str,
    kind: UnitKind,
    text: &str,
    cfg: &PathConfig,
) -> Result<PreparedUnit, PairRejection> {
    let reject = |reason: String| PairRejection {
        line: None,
        pair_id: Some(pair_id.to_string()),
        side: Some(kind),
        reason,
    };
    let ast = parse_and_validate(text, DEFAULT_MAX_DEPTH).map_err(|e| reject(e.to_string()))?;
    let label = ast
        .method_name()
        .map(str::to_lowercase)
        .ok_or_else(|| reject("method has no name terminal".into()))?;
    let unit_id = kind.unit_id(pair_id);
    let bag = extract_contexts(&ast, &unit_id, &label, cfg)
        .map_err(|e| reject(e.to_string()))?;
    Ok(PreparedUnit {
        unit: SourceUnit { id: unit_id, kind, text: text.to_string() },
        bag,
    })
}

/// Run both sides of a pair through the frontend and path extraction.
/// Both sides are labeled with their own (lowercased) names.
pub fn prepare_pair(pair: &CorpusPair, cfg: &PathConfig) -> Result<PreparedPair, PairRejection> {
    let method = prepare_unit(&pair.id, UnitKind::Method, &pair.focal_method, cfg)?;
    let test = prepare_unit(&pair.id, UnitKind::Test, &pair.test_case, cfg)?;
    Ok(PreparedPair { pair_id: pair.id.clone(), method, test })
}

/// Prepare a whole corpus, splitting survivors from rejections.
pub fn prepare_corpus(
    pairs: &[CorpusPair],
    cfg: &PathConfig,
) -> (Vec<PreparedPair>, Vec<PairRejection>) {
    let mut prepared = Vec::new();
    let mut rejections = Vec::new();
    for pair in pairs {
        match prepare_pair(pair, cfg) {
            Ok(p) => prepared.push(p),
            Err(r) => rejections.push(r),
        }
    }
    (prepared, rejections)
}

/// All training bags of a prepared corpus: the method bag and the test bag
/// of every pair, in corpus order.
pub fn training_bags(pairs: &[PreparedPair]) -> Vec<ContextBag> {
    let mut bags = Vec::with_capacity(pairs.len() * 2);
    for p in pairs {
        bags.push(p.method.bag.clone());
        bags.push(p.test.bag.clone());
    }
    bags
}
