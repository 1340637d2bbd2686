//! Evaluation harness: per-strategy similarity statistics, frequency
//! tables, significance testing, edit-distance usefulness, and the chart
//! exports behind them.

pub mod export;
pub mod levenshtein;
pub mod stats;
pub mod ttest;

use serde::Serialize;

use crate::frontend::UnitKind;
use crate::index::{cosine, EmbeddingStore, IndexError};
use crate::recommend::{recommend_functionality_vec, recommend_structure_vec};

pub use export::{histogram_bins, histogram_csv, radar_csv, HistogramBin, HISTOGRAM_BINS};
pub use levenshtein::{char_distance, edit_distance, normalize_source, token_distance};
pub use stats::{
    frequency_rows, pairwise_stats, FrequencyRow, LevRow, PairwiseStats, RadarRow, StatsError,
    StatsRow, Summary,
};
pub use ttest::{welch_t_test, TTestError, TTestResult, ALPHA};

/// The two recommendation strategies under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    /// Match similar methods, recommend their tests.
    Functionality,
    /// Match tests directly against the query.
    Structure,
}

impl Approach {
    pub fn number(self) -> u8 {
        match self {
            Approach::Functionality => 1,
            Approach::Structure => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Approach::Functionality => "Approach 1",
            Approach::Structure => "Approach 2",
        }
    }

    /// Column label of the strategy's primary similarity: the matched
    /// method for approach 1, the recommended test itself for approach 2.
    pub fn primary_label(self) -> &'static str {
        match self {
            Approach::Functionality => "Ma,Mb",
            Approach::Structure => "Ma,Tb",
        }
    }

    pub fn from_number(n: u8) -> Option<Approach> {
        match n {
            1 => Some(Approach::Functionality),
            2 => Some(Approach::Structure),
            _ => None,
        }
    }
}

/// Evaluation knobs; defaults follow the recommendation defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalOptions {
    pub tau_method: f64,
    pub tau_test: f64,
    /// Exclude the query's own pair so self-matches cannot inflate results.
    pub leave_one_out: bool,
    /// Token-level instead of character-level edit distance.
    pub token_level_levenshtein: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            tau_method: crate::recommend::DEFAULT_TAU_METHOD,
            tau_test: crate::recommend::DEFAULT_TAU_TEST,
            leave_one_out: true,
            token_level_levenshtein: false,
        }
    }
}

/// One evaluated query: the stored method, its oracle test, and the
/// strategy's rank-1 recommendation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    /// Corpus pair the query method came from.
    pub pair_id: String,
    pub recommended_test_id: String,
    /// Approach 1: cosine(query method, matched method).
    /// Approach 2: cosine(query method, recommended test).
    pub primary_sim: f64,
    /// Cosine between the oracle test and the recommended test.
    pub oracle_rec_sim: f64,
    /// Edit distance between oracle and recommended source.
    pub lev: usize,
    /// Oracle source length in characters (whitespace-normalized).
    pub oracle_len: usize,
}

/// Aggregated evaluation of one strategy over every stored method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproachEval {
    pub approach: Approach,
    /// Methods queried (every stored method with an oracle test).
    pub queries: usize,
    /// Queries with no candidate above the threshold; excluded from Count.
    pub no_candidates: usize,
    /// Stats over `primary_sim`; `None` when nothing was recommended.
    pub primary: Option<StatsRow>,
    /// Stats over `oracle_rec_sim`.
    pub oracle: Option<StatsRow>,
    /// "lower than 50%/70%" shares of `oracle_rec_sim`.
    pub frequency: Vec<FrequencyRow>,
    /// Edit-distance usefulness over the evaluated queries.
    pub lev: Option<LevRow>,
    pub samples: Vec<SampleRecord>,
}

impl ApproachEval {
    /// Radar rows for this strategy: one spoke per evaluated query, the
    /// primary similarity against the oracle-vs-recommended similarity.
    pub fn radar_rows(&self) -> Vec<RadarRow> {
        self.samples
            .iter()
            .map(|s| RadarRow {
                pair_id: s.pair_id.clone(),
                mm_sim: s.primary_sim,
                tt_sim: s.oracle_rec_sim,
            })
            .collect()
    }

    /// Oracle-vs-recommended similarity population (significance input).
    pub fn oracle_sims(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.oracle_rec_sim).collect()
    }
}

/// Evaluate one strategy: query every stored method, take the rank-1
/// recommendation, and compare it against the method's oracle test by
/// cosine and by edit distance. Queries with no candidates are counted
/// but contribute no statistics.
pub fn evaluate_approach(
    store: &EmbeddingStore,
    approach: Approach,
    opts: &EvalOptions,
) -> Result<ApproachEval, IndexError> {
    let mut samples = Vec::new();
    let mut queries = 0usize;
    let mut no_candidates = 0usize;
    for method in store.entries().iter().filter(|e| e.kind == UnitKind::Method) {
        let oracle = store.get(&method.partner_id).ok_or_else(|| {
            IndexError::Integrity(format!("missing partner for {}", method.unit_id))
        })?;
        queries += 1;
        let exclude = opts.leave_one_out.then_some(method.pair_id.as_str());
        let outcome = match approach {
            Approach::Functionality => recommend_functionality_vec(
                &method.vector,
                store,
                opts.tau_method,
                1,
                exclude,
            )?,
            Approach::Structure => {
                recommend_structure_vec(&method.vector, store, opts.tau_test, 1, exclude)?
            }
        };
        let Some(top) = outcome.candidates.first() else {
            no_candidates += 1;
            continue;
        };
        let rec_entry = store.get(&top.test_id).ok_or_else(|| {
            IndexError::Integrity(format!("recommended test {} not stored", top.test_id))
        })?;
        let primary_sim = match approach {
            Approach::Functionality => top.method_similarity.unwrap_or(f64::NAN),
            Approach::Structure => top.test_similarity,
        };
        let lev = if opts.token_level_levenshtein {
            token_distance(&oracle.source_text, &rec_entry.source_text)
        } else {
            char_distance(&oracle.source_text, &rec_entry.source_text)
        };
        samples.push(SampleRecord {
            pair_id: method.pair_id.clone(),
            recommended_test_id: top.test_id.clone(),
            primary_sim,
            oracle_rec_sim: cosine(&oracle.vector, &rec_entry.vector)?,
            lev,
            oracle_len: normalize_source(&oracle.source_text).chars().count(),
        });
    }
    let primary_values: Vec<f64> = samples.iter().map(|s| s.primary_sim).collect();
    let oracle_values: Vec<f64> = samples.iter().map(|s| s.oracle_rec_sim).collect();
    let lev_values: Vec<usize> = samples.iter().map(|s| s.lev).collect();
    let len_values: Vec<usize> = samples.iter().map(|s| s.oracle_len).collect();
    let lev = match (
        Summary::from_values(&lev_values),
        Summary::from_values(&len_values),
    ) {
        (Some(l), Some(n)) => Some(LevRow {
            name: approach.label().to_string(),
            count: samples.len(),
            lev: l,
            oracle_len: n,
        }),
        _ => None,
    };
    Ok(ApproachEval {
        approach,
        queries,
        no_candidates,
        primary: StatsRow::from_values(approach.primary_label(), &primary_values),
        oracle: StatsRow::from_values("Ta,Tb", &oracle_values),
        frequency: frequency_rows(&oracle_values),
        lev,
        samples,
    })
}

/// The complete evaluation: population statistics, both strategies, and
/// the significance of the difference between their similarity
/// populations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// Hash of the run configuration that produced the artifacts.
    pub config_hash: String,
    /// Number of method/test pairs in the store.
    pub pairs: usize,
    pub options: EvalOptions,
    /// Highly similar method pairs and their tests; `None` when no pair
    /// clears the threshold.
    pub all_samples: Option<PairwiseStats>,
    /// "lower than 50%/70%" shares of the all-samples test similarities.
    pub all_samples_frequency: Vec<FrequencyRow>,
    pub approach1: ApproachEval,
    pub approach2: ApproachEval,
    /// Welch test between the two oracle-similarity populations; `None`
    /// when either side is degenerate.
    pub significance: Option<TTestResult>,
}

/// Run the full evaluation over a store.
pub fn build_report(
    store: &EmbeddingStore,
    opts: &EvalOptions,
    config_hash: &str,
) -> Result<EvalReport, IndexError> {
    let all_samples = match pairwise_stats(store, opts.tau_method) {
        Ok(p) => Some(p),
        Err(StatsError::NoPairs) => None,
        Err(StatsError::Index(e)) => return Err(e),
    };
    let all_samples_frequency = frequency_rows(
        all_samples
            .as_ref()
            .map(|p| p.tt_values.as_slice())
            .unwrap_or(&[]),
    );
    let approach1 = evaluate_approach(store, Approach::Functionality, opts)?;
    let approach2 = evaluate_approach(store, Approach::Structure, opts)?;
    let significance =
        welch_t_test(&approach1.oracle_sims(), &approach2.oracle_sims()).ok();
    let pairs = store
        .entries()
        .iter()
        .filter(|e| e.kind == UnitKind::Method)
        .count();
    Ok(EvalReport {
        config_hash: config_hash.to_string(),
        pairs,
        options: *opts,
        all_samples,
        all_samples_frequency,
        approach1,
        approach2,
        significance,
    })
}

// ---- text rendering -------------------------------------------------------

fn fmt_sim(v: f64) -> String {
    format!("{v:.2}")
}

/// Aligned text table: a left-aligned row-name column followed by
/// right-aligned cells; widths computed over all rows at render time.
struct Table {
    rows: Vec<(String, Vec<String>)>,
}

impl Table {
    fn new() -> Table {
        Table { rows: Vec::new() }
    }

    fn row<S: Into<String>>(&mut self, name: &str, cells: Vec<S>) {
        self.rows
            .push((name.to_string(), cells.into_iter().map(Into::into).collect()));
    }

    fn render(&self) -> String {
        let cols = self.rows.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
        let name_w = self.rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        let mut widths = vec![0usize; cols];
        for (_, cells) in &self.rows {
            for (i, cell) in cells.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut out = String::new();
        for (name, cells) in &self.rows {
            let mut line = format!("{name:<name_w$}");
            for (i, cell) in cells.iter().enumerate() {
                line.push_str(&format!("  {cell:>w$}", w = widths[i]));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

/// The aligned-text report: frequency table, similarity statistics table
/// (Count/Mean/Std./Max./Min.), edit-distance table, significance line.
pub fn render_text(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("test recommendation evaluation\n");
    out.push_str(&format!("config hash: {}\n", report.config_hash));
    out.push_str(&format!("pairs in store: {}\n", report.pairs));
    out.push_str(&format!(
        "leave-one-out: {}; edit distance: {}-level\n\n",
        if report.options.leave_one_out { "on" } else { "off" },
        if report.options.token_level_levenshtein {
            "token"
        } else {
            "character"
        },
    ));

    // Frequency of low similarity per population.
    out.push_str("Frequency of similarity to the expected test\n");
    let mut t = Table::new();
    t.row("Similarity", vec!["All Samples", "Approach 1", "Approach 2"]);
    for i in 0..2 {
        t.row(
            &report.all_samples_frequency[i].label,
            vec![
                format!("{:.1}%", report.all_samples_frequency[i].percent),
                format!("{:.1}%", report.approach1.frequency[i].percent),
                format!("{:.1}%", report.approach2.frequency[i].percent),
            ],
        );
    }
    out.push_str(&t.render());
    out.push('\n');

    // Similarity statistics: Count/Mean/Std./Max./Min. across the six
    // populations.
    out.push_str("Similarity between method and test pairs\n");
    let dash = || "-".to_string();
    let mut t = Table::new();
    t.row(
        "",
        vec![
            "All Samples",
            "All Samples",
            "Approach 1",
            "Approach 1",
            "Approach 2",
            "Approach 2",
        ],
    );
    t.row(
        "",
        vec!["Ma,Mb", "Ta,Tb", "Ma,Mb", "Ta,Tb", "Ma,Tb", "Ta,Tb"],
    );
    let stats_cols: Vec<Option<&StatsRow>> = vec![
        report.all_samples.as_ref().map(|p| &p.method_method),
        report.all_samples.as_ref().map(|p| &p.test_test),
        report.approach1.primary.as_ref(),
        report.approach1.oracle.as_ref(),
        report.approach2.primary.as_ref(),
        report.approach2.oracle.as_ref(),
    ];
    let cell = |f: &dyn Fn(&StatsRow) -> String| -> Vec<String> {
        stats_cols.iter().map(|c| c.map_or(dash(), f)).collect()
    };
    t.row("Count", cell(&|r| r.count.to_string()));
    t.row("Mean", cell(&|r| fmt_sim(r.mean)));
    t.row("Std.", cell(&|r| fmt_sim(r.std)));
    t.row("Max.", cell(&|r| fmt_sim(r.max)));
    t.row("Min.", cell(&|r| fmt_sim(r.min)));
    out.push_str(&t.render());
    out.push('\n');

    // Edit distance between oracles and recommended tests.
    out.push_str("Edit distance between oracles and recommended tests\n");
    let mut t = Table::new();
    t.row("", vec!["Approach 1", "Approach 1", "Approach 2", "Approach 2"]);
    t.row("", vec!["Lev.", "Length", "Lev.", "Length"]);
    let lev_cols = [report.approach1.lev.as_ref(), report.approach2.lev.as_ref()];
    // Each strategy spans a (Lev., Length) column pair.
    let pair_cell = |f: &dyn Fn(&Summary) -> String| -> Vec<String> {
        lev_cols
            .iter()
            .flat_map(|c| match c {
                Some(r) => vec![f(&r.lev), f(&r.oracle_len)],
                None => vec![dash(), dash()],
            })
            .collect()
    };
    t.row(
        "Count",
        lev_cols
            .iter()
            .flat_map(|c| {
                let s = c.map_or(dash(), |r| r.count.to_string());
                vec![s.clone(), s]
            })
            .collect::<Vec<_>>(),
    );
    t.row("Mean", pair_cell(&|s| format!("{:.1}", s.mean)));
    t.row("Std.", pair_cell(&|s| format!("{:.1}", s.std)));
    t.row("Max.", pair_cell(&|s| s.max.to_string()));
    t.row("Min.", pair_cell(&|s| s.min.to_string()));
    out.push_str(&t.render());
    out.push('\n');

    for a in [&report.approach1, &report.approach2] {
        out.push_str(&format!(
            "{}: {} of {} queries answered ({} without candidates)\n",
            a.label(),
            a.samples.len(),
            a.queries,
            a.no_candidates
        ));
    }
    match &report.significance {
        Some(s) => out.push_str(&format!(
            "Welch t-test on oracle similarity, approach 1 vs 2: t = {:.4}, df = {:.2}, p = {:.4} -> {} at alpha = {}\n",
            s.t,
            s.df,
            s.p,
            if s.significant() { "significant" } else { "not significant" },
            ALPHA,
        )),
        None => out.push_str(
            "Welch t-test not computable (a population is too small or constant)\n",
        ),
    }
    out
}

impl ApproachEval {
    pub fn label(&self) -> &'static str {
        self.approach.label()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::StoreEntry;

    fn entry(unit_id: &str, kind: UnitKind, vector: Vec<f64>, source: &str) -> StoreEntry {
        let pair_id = unit_id[2..].to_string();
        let partner_id = match kind {
            UnitKind::Method => format!("T:{pair_id}"),
            UnitKind::Test => format!("M:{pair_id}"),
        };
        StoreEntry {
            unit_id: unit_id.to_string(),
            pair_id,
            kind,
            partner_id,
            source_text: source.to_string(),
            vector,
        }
    }

    /// Two near-identical pairs whose tests share source text, plus one
    /// orthogonal pair.
    fn degenerate_store() -> EmbeddingStore {
        let deg = |d: f64| {
            let r = d.to_radians();
            vec![r.cos(), r.sin()]
        };
        EmbeddingStore::from_entries(
            2,
            vec![
                entry("M:a", UnitKind::Method, deg(0.0), "int a() { return 1; }"),
                entry("T:a", UnitKind::Test, deg(40.0), "void t() { check(1); }"),
                entry("M:b", UnitKind::Method, deg(5.0), "int b() { return 2; }"),
                entry("T:b", UnitKind::Test, deg(40.0), "void t() { check(1); }"),
                entry("M:c", UnitKind::Method, deg(90.0), "int c() { return 3; }"),
                entry("T:c", UnitKind::Test, deg(220.0), "void u() { check(3); }"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn functionality_on_degenerate_corpus_is_perfect() {
        // a and b are mutual nearest methods above 0.9 (cos 5 deg) and
        // their tests are identical vectors and identical source: cosine
        // mean 1, edit distance 0. c matches nobody.
        let store = degenerate_store();
        let eval = evaluate_approach(
            &store,
            Approach::Functionality,
            &EvalOptions::default(),
        )
        .unwrap();
        assert_eq!(eval.queries, 3);
        assert_eq!(eval.no_candidates, 1); // M:c
        assert_eq!(eval.samples.len(), 2);
        let oracle = eval.oracle.unwrap();
        assert!((oracle.mean - 1.0).abs() < 1e-12);
        let lev = eval.lev.unwrap();
        assert_eq!(lev.lev.max, 0);
        assert_eq!(lev.count, 2);
        // Oracle length: "void t() { check(1); }" is 22 chars normalized.
        assert_eq!(lev.oracle_len.min, 22);
    }

    #[test]
    fn leave_one_out_excludes_own_pair() {
        let store = degenerate_store();
        let on = evaluate_approach(
            &store,
            Approach::Functionality,
            &EvalOptions::default(),
        )
        .unwrap();
        // With leave-one-out, M:a cannot match M:a.
        assert!(on
            .samples
            .iter()
            .all(|s| s.recommended_test_id != format!("T:{}", s.pair_id)));
        let off = evaluate_approach(
            &store,
            Approach::Functionality,
            &EvalOptions {
                leave_one_out: false,
                ..EvalOptions::default()
            },
        )
        .unwrap();
        // Without it, every query matches itself at similarity 1 and gets
        // its own test back at rank 1... unless a tied twin test with a
        // smaller id wins. T:a and T:b are exact ties for both queries, so
        // T:a wins both; M:c matches itself.
        assert_eq!(off.samples.len(), 3);
        assert_eq!(off.no_candidates, 0);
        let c_sample = off.samples.iter().find(|s| s.pair_id == "c").unwrap();
        assert_eq!(c_sample.recommended_test_id, "T:c");
        assert!((c_sample.primary_sim - 1.0).abs() < 1e-12);
    }

    #[test]
    fn structure_approach_records_test_similarity_as_primary() {
        let store = degenerate_store();
        let eval = evaluate_approach(
            &store,
            Approach::Structure,
            &EvalOptions {
                tau_test: 0.7,
                ..EvalOptions::default()
            },
        )
        .unwrap();
        // M:a at 0 deg vs T:b at 40 deg: cos 40 = .766 > .7 -> recommended.
        let a = eval.samples.iter().find(|s| s.pair_id == "a").unwrap();
        assert_eq!(a.recommended_test_id, "T:b");
        assert!((a.primary_sim - 40f64.to_radians().cos()).abs() < 1e-12);
        // Oracle T:a vs recommended T:b are identical vectors.
        assert!((a.oracle_rec_sim - 1.0).abs() < 1e-12);
    }

    #[test]
    fn count_excludes_no_candidate_queries() {
        let store = degenerate_store();
        let eval = evaluate_approach(
            &store,
            Approach::Functionality,
            &EvalOptions::default(),
        )
        .unwrap();
        assert!(eval.samples.len() <= eval.queries);
        assert_eq!(eval.samples.len() + eval.no_candidates, eval.queries);
        assert_eq!(eval.oracle.as_ref().unwrap().count, eval.samples.len());
    }

    #[test]
    fn full_report_shape() {
        let store = degenerate_store();
        let report = build_report(&store, &EvalOptions::default(), "cafe").unwrap();
        assert_eq!(report.pairs, 3);
        let all = report.all_samples.as_ref().unwrap();
        assert_eq!(all.method_method.count, 1); // only (a,b)
        assert_eq!(report.all_samples_frequency.len(), 2);
        // Both approaches evaluated regardless of how small they are.
        assert_eq!(report.approach1.approach, Approach::Functionality);
        assert_eq!(report.approach2.approach, Approach::Structure);
        let text = render_text(&report);
        for needle in [
            "Count",
            "Mean",
            "Std.",
            "Max.",
            "Min.",
            "lower than 50%",
            "lower than 70%",
            "All Samples",
            "Approach 1",
            "Approach 2",
            "Ma,Mb",
            "Ta,Tb",
            "Ma,Tb",
            "Lev.",
            "Length",
            "config hash: cafe",
        ] {
            assert!(text.contains(needle), "report lacks {needle:?}:\n{text}");
        }
        // JSON round-trips.
        let json = serde_json::to_string_pretty(&report).unwrap();
        assert!(json.contains("\"config_hash\": \"cafe\""));
    }

    #[test]
    fn frequency_monotonicity_in_report() {
        let store = degenerate_store();
        let report = build_report(&store, &EvalOptions::default(), "x").unwrap();
        for rows in [
            &report.all_samples_frequency,
            &report.approach1.frequency,
            &report.approach2.frequency,
        ] {
            assert!(rows[1].percent >= rows[0].percent);
        }
    }

    #[test]
    fn radar_rows_mirror_samples() {
        let store = degenerate_store();
        let eval = evaluate_approach(
            &store,
            Approach::Functionality,
            &EvalOptions::default(),
        )
        .unwrap();
        let radar = eval.radar_rows();
        assert_eq!(radar.len(), eval.samples.len());
        for (r, s) in radar.iter().zip(&eval.samples) {
            assert_eq!(r.pair_id, s.pair_id);
            assert_eq!(r.mm_sim, s.primary_sim);
            assert_eq!(r.tt_sim, s.oracle_rec_sim);
        }
    }
}
