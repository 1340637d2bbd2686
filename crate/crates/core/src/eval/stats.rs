//! Descriptive statistics over similarity populations.

use serde::Serialize;
use thiserror::Error;

use crate::frontend::UnitKind;
use crate::index::{cosine, EmbeddingStore, IndexError};

/// Count / mean / std / max / min over one named population.
/// Standard deviation uses the population formula (divisor n).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
}

impl StatsRow {
    /// `None` when the population is empty.
    pub fn from_values(name: &str, values: &[f64]) -> Option<StatsRow> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        Some(StatsRow {
            name: name.to_string(),
            count: values.len(),
            mean,
            std: var.sqrt(),
            max,
            min,
        })
    }
}

/// Share of a population falling strictly below a similarity threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub label: String,
    pub percent: f64,
}

/// The two frequency rows reported per population: "lower than 50%" and
/// "lower than 70%". Empty populations report 0%.
pub fn frequency_rows(values: &[f64]) -> Vec<FrequencyRow> {
    let pct_below = |t: f64| {
        if values.is_empty() {
            0.0
        } else {
            100.0 * values.iter().filter(|v| **v < t).count() as f64 / values.len() as f64
        }
    };
    vec![
        FrequencyRow {
            label: "lower than 50%".to_string(),
            percent: pct_below(0.5),
        },
        FrequencyRow {
            label: "lower than 70%".to_string(),
            percent: pct_below(0.7),
        },
    ]
}

/// Mean/std/max/min of a non-negative integer population (population std).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub max: usize,
    pub min: usize,
}

impl Summary {
    pub fn from_values(values: &[usize]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let floats: Vec<f64> = values.iter().map(|v| *v as f64).collect();
        let row = StatsRow::from_values("", &floats)?;
        Some(Summary {
            mean: row.mean,
            std: row.std,
            max: *values.iter().max().unwrap(),
            min: *values.iter().min().unwrap(),
        })
    }
}

/// Edit-distance usefulness row for one strategy: distances between oracle
/// and recommended test sources plus the oracle lengths themselves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevRow {
    pub name: String,
    pub count: usize,
    pub lev: Summary,
    pub oracle_len: Summary,
}

/// One spoke of the radar export: a method pair's similarity next to the
/// similarity of the associated tests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadarRow {
    pub pair_id: String,
    pub mm_sim: f64,
    pub tt_sim: f64,
}

#[derive(Debug, Error)]
pub enum StatsError {
    /// No unordered method pair cleared the similarity threshold.
    #[error("no method pair exceeds the similarity threshold")]
    NoPairs,
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Statistics over highly similar method pairs and their tests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseStats {
    /// Method–method similarities of the matched pairs.
    pub method_method: StatsRow,
    /// Test–test similarities of the same pairs' partner tests.
    pub test_test: StatsRow,
    pub radar: Vec<RadarRow>,
    /// Raw test–test values (frequency table input).
    pub tt_values: Vec<f64>,
}

/// Enumerate unordered method pairs with cosine strictly above
/// `tau_method`; report the method-pair similarities and, for the same
/// pairs, the similarity between their partner tests. Radar rows identify
/// a pair by the two corpus pair ids joined with `|`, in store order.
pub fn pairwise_stats(
    store: &EmbeddingStore,
    tau_method: f64,
) -> Result<PairwiseStats, StatsError> {
    let methods: Vec<_> = store
        .entries()
        .iter()
        .filter(|e| e.kind == UnitKind::Method)
        .collect();
    let mut mm = Vec::new();
    let mut tt = Vec::new();
    let mut radar = Vec::new();
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            let (a, b) = (methods[i], methods[j]);
            let mm_sim = cosine(&a.vector, &b.vector)?;
            if mm_sim <= tau_method {
                continue;
            }
            let ta = store.get(&a.partner_id).ok_or_else(|| {
                IndexError::Integrity(format!("missing partner for {}", a.unit_id))
            })?;
            let tb = store.get(&b.partner_id).ok_or_else(|| {
                IndexError::Integrity(format!("missing partner for {}", b.unit_id))
            })?;
            let tt_sim = cosine(&ta.vector, &tb.vector)?;
            mm.push(mm_sim);
            tt.push(tt_sim);
            radar.push(RadarRow {
                pair_id: format!("{}|{}", a.pair_id, b.pair_id),
                mm_sim,
                tt_sim,
            });
        }
    }
    let method_method =
        StatsRow::from_values("method-method", &mm).ok_or(StatsError::NoPairs)?;
    let test_test = StatsRow::from_values("test-test", &tt).ok_or(StatsError::NoPairs)?;
    Ok(PairwiseStats {
        method_method,
        test_test,
        radar,
        tt_values: tt,
    })
}
