//! CSV exports backing the radar and histogram charts.

use crate::eval::stats::RadarRow;
use crate::frontend::UnitKind;
use crate::index::{cosine, EmbeddingStore, IndexError};

/// Number of uniform histogram bins over [-1, 1].
pub const HISTOGRAM_BINS: usize = 40;
const BIN_WIDTH: f64 = 2.0 / HISTOGRAM_BINS as f64;

/// Radar rows as CSV: `pair_id,mm_sim,tt_sim`, similarities to six
/// decimals. An empty population yields a header-only file.
pub fn radar_csv(rows: &[RadarRow]) -> String {
    let mut out = String::from("pair_id,mm_sim,tt_sim\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6}\n",
            r.pair_id, r.mm_sim, r.tt_sim
        ));
    }
    out
}

/// One histogram bin: [left, right) except the last bin, which also
/// claims cosine exactly 1.0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
}

/// Histogram of cosine(method, partner test) over every stored pair:
/// 40 uniform bins on [-1, 1]. Bin counts sum to the number of pairs.
pub fn histogram_bins(store: &EmbeddingStore) -> Result<Vec<HistogramBin>, IndexError> {
    let mut counts = [0usize; HISTOGRAM_BINS];
    for entry in store.entries().iter().filter(|e| e.kind == UnitKind::Method) {
        let partner = store.get(&entry.partner_id).ok_or_else(|| {
            IndexError::Integrity(format!("missing partner for {}", entry.unit_id))
        })?;
        let c = cosine(&entry.vector, &partner.vector)?;
        let idx = (((c + 1.0) / BIN_WIDTH) as usize).min(HISTOGRAM_BINS - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramBin {
            bin_left: i as f64 * BIN_WIDTH - 1.0,
            bin_right: (i + 1) as f64 * BIN_WIDTH - 1.0,
            count,
        })
        .collect())
}

/// Histogram as CSV: `bin_left,bin_right,count`, edges to three decimals.
pub fn histogram_csv(store: &EmbeddingStore) -> Result<String, IndexError> {
    let mut out = String::from("bin_left,bin_right,count\n");
    for bin in histogram_bins(store)? {
        out.push_str(&format!(
            "{:.3},{:.3},{}\n",
            bin.bin_left, bin.bin_right, bin.count
        ));
    }
    Ok(out)
}
