//! Gate suite: eleven behavioural guarantees, one pass/fail line each.
//!
//! Every criterion checks the library against an independent route —
//! central finite differences, brute-force scans, exhaustive recursion,
//! direct numerical integration — never against the code under test.
//! Run with `--nocapture` to see the per-criterion lines.

use std::collections::HashMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use testrec::corpus::{prepare_corpus, read_corpus, training_bags, CorpusPair};
use testrec::eval::{char_distance, histogram_bins, welch_t_test, FrequencyRow};
use testrec::frontend::{parse_and_validate, UnitKind, DEFAULT_MAX_DEPTH};
use testrec::index::{above_threshold, cosine, top_k, EmbeddingStore, StoreEntry};
use testrec::model::{
    attention_weights, code_vector, grad, loss, predict_label, train, ModelConfig, ModelParams,
};
use testrec::pathext::{extract_contexts, stable_hash64, ContextBag, PathConfig, PathContext};
use testrec::recommend::{embed_query, recommend_functionality_vec};
use testrec::vocab::Vocabulary;

/// Run one criterion body and print its verdict line; a failure still
/// fails the enclosing test.
fn criterion(number: u32, name: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("ACCEPTANCE {number:>2} {name}: PASS"),
        Err(e) => {
            println!("ACCEPTANCE {number:>2} {name}: FAIL");
            resume_unwind(e);
        }
    }
}

fn ctx(s: &str, p: &str, t: &str) -> PathContext {
    PathContext {
        source_value: s.to_string(),
        path: p.to_string(),
        path_hash: stable_hash64(p.as_bytes()),
        target_value: t.to_string(),
    }
}

fn bag(unit_id: &str, label: &str, contexts: &[(&str, &str, &str)]) -> ContextBag {
    ContextBag {
        unit_id: unit_id.to_string(),
        label: label.to_string(),
        contexts: contexts.iter().map(|(s, p, t)| ctx(s, p, t)).collect(),
    }
}

// ---------------------------------------------------------------- 1

/// Central finite difference of the loss along one parameter slot.
fn numeric_grad(
    params: &ModelParams,
    b: &ContextBag,
    vocab: &Vocabulary,
    y: u32,
    slot: impl Fn(&mut ModelParams) -> &mut f64,
    h: f64,
) -> f64 {
    let mut up = params.clone();
    *slot(&mut up) += h;
    let mut dn = params.clone();
    *slot(&mut dn) -= h;
    (loss(&up, b, vocab, y).unwrap() - loss(&dn, b, vocab, y).unwrap()) / (2.0 * h)
}

/// Relative error with the denominator floored at the scale finite
/// differences can actually resolve.
fn guarded_rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

#[test]
fn criterion_01_gradient_correctness() {
    criterion(1, "gradients match central finite differences", || {
        let started = Instant::now();
        // Three labels in the vocabulary; the checked bag has two contexts.
        let bags = vec![
            bag("U:a", "alpha", &[("x", "PA", "y"), ("y", "PB", "z")]),
            bag("U:b", "beta", &[("z", "PB", "x")]),
            bag("U:c", "gamma", &[("w", "PC", "w")]),
        ];
        let vocab = Vocabulary::build(&bags, 1).unwrap();
        assert_eq!(vocab.label_table_len(), 3 + 2, "three labels plus the reserved rows");
        let cfg = ModelConfig {
            token_dim: 4,
            path_dim: 4,
            code_dim: 12,
            ..ModelConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = ModelParams::init(&cfg, &vocab, &mut rng);
        let checked_bag = &bags[0];
        let y = vocab.lookup_label(&checked_bag.label);
        let analytic = grad(&params, checked_bag, &vocab, y).unwrap();

        let h = 1e-5;
        let mut worst = 0.0f64;
        let mut slots = 0usize;
        macro_rules! sweep {
            ($field:ident) => {
                for r in 0..params.$field.rows() {
                    for c in 0..params.$field.cols() {
                        let num = numeric_grad(
                            &params,
                            checked_bag,
                            &vocab,
                            y,
                            |p| &mut p.$field.row_mut(r)[c],
                            h,
                        );
                        let ana = analytic.$field.row(r)[c];
                        worst = worst.max(guarded_rel_err(num, ana));
                        slots += 1;
                    }
                }
            };
        }
        sweep!(value_embeddings);
        sweep!(path_embeddings);
        sweep!(combine_weights);
        sweep!(label_weights);
        for i in 0..params.attention.len() {
            let num =
                numeric_grad(&params, checked_bag, &vocab, y, |p| &mut p.attention[i], h);
            worst = worst.max(guarded_rel_err(num, analytic.attention[i]));
            slots += 1;
        }

        let elapsed = started.elapsed();
        println!("  checked {slots} parameters; worst relative error {worst:.3e}; {elapsed:?}");
        assert!(slots > 100, "the sweep must cover every tensor");
        assert!(worst < 1e-4, "worst relative error {worst:.3e} over {slots} slots");
        assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    });
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_02_attention_invariants() {
    criterion(2, "attention weights are a proper softmax", || {
        let bags = vec![
            bag("U:a", "alpha", &[("x", "PA", "y"), ("y", "PB", "z"), ("x", "PC", "z")]),
            bag("U:b", "beta", &[("z", "PB", "x")]),
            bag("U:c", "gamma", &[("w", "PC", "w")]),
        ];
        let vocab = Vocabulary::build(&bags, 1).unwrap();
        let cfg = ModelConfig {
            token_dim: 4,
            path_dim: 4,
            code_dim: 12,
            ..ModelConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut params = ModelParams::init(&cfg, &vocab, &mut rng);

        // Attention scores up to roughly +-50: entries +-4 against
        // combined vectors with entries +-4 across 12 dimensions.
        for a in params.attention.iter_mut() {
            *a = rng.random_range(-4.0..4.0);
        }
        let mut hottest = 0.0f64;
        for _ in 0..1_000 {
            let n = rng.random_range(1..=8);
            let combined: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..12).map(|_| rng.random_range(-4.0..4.0)).collect())
                .collect();
            for c in &combined {
                let score: f64 = params.attention.iter().zip(c).map(|(a, x)| a * x).sum();
                hottest = hottest.max(score.abs());
            }
            let alpha = attention_weights(&params, &combined).unwrap();
            assert_eq!(alpha.len(), n);
            let sum: f64 = alpha.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "weights sum to {sum}");
            assert!(alpha.iter().all(|&a| a.is_finite() && a > 0.0));
        }
        println!("  1000 fuzzed bags; hottest attention score {hottest:.1}");
        assert!(hottest > 40.0, "the fuzz must actually reach hot scores");

        // Identical contexts share the weight exactly evenly.
        for n in 1..=7usize {
            let one: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
            let alpha = attention_weights(&params, &vec![one; n]).unwrap();
            for &a in &alpha {
                assert!((a - 1.0 / n as f64).abs() < 1e-12, "n={n}: weight {a}");
            }
        }

        // Shifting every label logit by the same constant cannot move the
        // predicted label: translate each label row by a vector whose dot
        // with the code vector is exactly +50.
        let v = code_vector(&params, &bags[0], &vocab).unwrap();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        assert!(vv > 1e-12, "degenerate code vector");
        let argmax = |probs: &[f64]| {
            probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0
        };
        let before = argmax(&predict_label(&params, &v));
        let shift: Vec<f64> = v.iter().map(|x| 50.0 * x / vv).collect();
        let mut shifted = params.clone();
        for r in 0..shifted.label_weights.rows() {
            for (slot, d) in shifted.label_weights.row_mut(r).iter_mut().zip(&shift) {
                *slot += d;
            }
        }
        let after = argmax(&predict_label(&shifted, &v));
        assert_eq!(before, after, "argmax moved under a uniform logit shift");
    });
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_03_code_vector_permutation_invariance() {
    criterion(3, "code vector ignores bag order", || {
        let source = "int tally(int n) { int s = 0; for (int i = 0; i < n; i++) { s = s + i * i; } if (s > 100) { s = s - n; } return s; }";
        let ast = parse_and_validate(source, DEFAULT_MAX_DEPTH).unwrap();
        let base = extract_contexts(&ast, "U:q", "tally", &PathConfig::default()).unwrap();
        assert!(base.contexts.len() >= 20, "need a rich bag, got {}", base.contexts.len());

        let vocab = Vocabulary::build(std::slice::from_ref(&base), 1).unwrap();
        let cfg = ModelConfig {
            token_dim: 4,
            path_dim: 4,
            code_dim: 12,
            ..ModelConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let params = ModelParams::init(&cfg, &vocab, &mut rng);
        let reference = code_vector(&params, &base, &vocab).unwrap();

        let mut worst = 0.0f64;
        for _ in 0..1_000 {
            let mut shuffled = base.clone();
            shuffled.contexts.shuffle(&mut rng);
            let v = code_vector(&params, &shuffled, &vocab).unwrap();
            for (a, b) in v.iter().zip(&reference) {
                worst = worst.max((a - b).abs());
            }
        }
        println!("  1000 shuffles; worst component drift {worst:.3e}");
        assert!(worst < 1e-12, "worst drift {worst:.3e}");
    });
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_04_overfitting_oracle() {
    criterion(4, "a small corpus is learnable to 95% top-1", || {
        let started = Instant::now();
        let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/toy50.jsonl");
        let read = read_corpus(fixture.as_ref()).unwrap();
        assert_eq!(read.pairs.len(), 50);
        assert!(read.rejections.is_empty(), "{:?}", read.rejections);
        let (prepared, rejected) = prepare_corpus(&read.pairs, &PathConfig::default());
        assert!(rejected.is_empty(), "{rejected:?}");
        assert_eq!(prepared.len(), 50);
        let bags = training_bags(&prepared);
        assert_eq!(bags.len(), 100);

        let vocab = Vocabulary::build(&bags, 1).unwrap();
        let epochs = 200;
        assert!(epochs <= 200);
        let cfg = ModelConfig {
            token_dim: 16,
            path_dim: 16,
            code_dim: 32,
            epochs,
            // One label per unit makes this pure memorization; a hotter
            // step rate lets the tiny model finish inside the epoch cap.
            learning_rate: 1e-2,
            ..ModelConfig::default()
        };
        let outcome = train(&bags, &vocab, &cfg).unwrap();

        let mut correct = 0usize;
        for b in &bags {
            let v = code_vector(&outcome.params, b, &vocab).unwrap();
            let probs = predict_label(&outcome.params, &v);
            let argmax = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0 as u32;
            if argmax == vocab.lookup_label(&b.label) {
                correct += 1;
            }
        }
        let accuracy = correct as f64 / bags.len() as f64;
        let elapsed = started.elapsed();
        println!(
            "  {epochs} epochs; top-1 {correct}/{} = {accuracy:.2}; first/last mean loss {:.4}/{:.4}; {elapsed:?}",
            bags.len(),
            outcome.epoch_mean_loss.first().unwrap(),
            outcome.epoch_mean_loss.last().unwrap(),
        );
        assert!(accuracy >= 0.95, "top-1 accuracy {accuracy:.3}");
        assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    });
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_05_retrieval_exactness() {
    criterion(5, "retrieval equals a brute-force scan", || {
        let dim = 384;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut random_vec = |scale: f64| -> Vec<f64> {
            (0..dim).map(|_| rng.random_range(-scale..scale)).collect()
        };

        // Fifty cluster centres; each entry is a centre plus noise whose
        // amplitude cycles from zero (exact duplicates, hence ties) to
        // large (essentially unrelated), so both thresholds see real
        // populations on either side.
        let centres: Vec<Vec<f64>> = (0..50).map(|_| random_vec(1.0)).collect();
        let amplitudes = [0.0, 0.0, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2];
        let mut entries = Vec::new();
        for i in 0..500 {
            let centre = &centres[i % centres.len()];
            let amp = amplitudes[(i / centres.len()) % amplitudes.len()];
            let make = |noise: Vec<f64>| -> Vec<f64> {
                centre.iter().zip(&noise).map(|(c, n)| c + amp * n).collect()
            };
            let mv = make(random_vec(1.0));
            let tv = make(random_vec(1.0));
            entries.push(StoreEntry {
                unit_id: format!("M:r{i:03}"),
                pair_id: format!("r{i:03}"),
                kind: UnitKind::Method,
                partner_id: format!("T:r{i:03}"),
                source_text: String::new(),
                vector: mv,
            });
            entries.push(StoreEntry {
                unit_id: format!("T:r{i:03}"),
                pair_id: format!("r{i:03}"),
                kind: UnitKind::Test,
                partner_id: format!("M:r{i:03}"),
                source_text: String::new(),
                vector: tv,
            });
        }
        let store = EmbeddingStore::from_entries(dim, entries).unwrap();

        // Brute-force oracle: score every entry of the kind, sort by
        // descending similarity then ascending id, independent of the
        // production scan.
        let oracle = |query: &[f64], kind: UnitKind| -> Vec<(String, f64)> {
            let mut scored: Vec<(String, f64)> = store
                .entries()
                .iter()
                .filter(|e| e.kind == kind)
                .map(|e| (e.unit_id.clone(), cosine(query, &e.vector).unwrap()))
                .collect();
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            scored
        };

        // Queries: copies of stored vectors (exact 1.0 matches and ties)
        // plus fresh perturbed centres.
        let mut queries: Vec<Vec<f64>> = Vec::new();
        for i in (0..500).step_by(25) {
            queries.push(store.entries()[i * 2].vector.clone());
        }
        for i in 0..20 {
            let centre = &centres[(i * 7) % centres.len()];
            let noise = random_vec(1.0);
            queries
                .push(centre.iter().zip(&noise).map(|(c, n)| c + 0.15 * n).collect());
        }

        let mut threshold_hits = 0usize;
        let mut threshold_misses = 0usize;
        for q in &queries {
            for kind in [UnitKind::Method, UnitKind::Test] {
                let expect = oracle(q, kind);
                for k in [1usize, 5, 50] {
                    let got = top_k(&store, q, kind, k).unwrap();
                    assert_eq!(got.len(), k.min(expect.len()));
                    for (hit, (id, sim)) in got.iter().zip(&expect) {
                        assert_eq!(&hit.entry.unit_id, id, "top_k order diverged at k={k}");
                        assert!(
                            hit.similarity == *sim,
                            "similarity mismatch for {id}: {} vs {sim}",
                            hit.similarity
                        );
                    }
                }
                for tau in [0.7, 0.9] {
                    let got = above_threshold(&store, q, kind, tau).unwrap();
                    let want: Vec<&(String, f64)> =
                        expect.iter().take_while(|(_, s)| *s > tau).collect();
                    assert_eq!(got.len(), want.len(), "threshold {tau} set size");
                    threshold_hits += got.len();
                    threshold_misses += expect.len() - got.len();
                    for (hit, (id, sim)) in got.iter().zip(&want) {
                        assert_eq!(&hit.entry.unit_id, id, "threshold order diverged");
                        assert!(hit.similarity == *sim);
                        assert!(hit.similarity > tau, "strictly above only");
                    }
                }
            }
        }
        println!(
            "  {} queries x 2 kinds; {threshold_hits} hits / {threshold_misses} misses across thresholds",
            queries.len()
        );
        assert!(threshold_hits > 0, "thresholds never fired; fixture too diffuse");
        assert!(threshold_misses > 0, "thresholds never rejected; fixture too tight");
    });
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_06_threshold_semantics() {
    criterion(6, "0.90 threshold is strictly exclusive", || {
        // Two stored methods at similarity 0.95 and 0.89 to the query.
        let planted = |c: f64, sign: f64| vec![c, sign * (1.0 - c * c).sqrt(), 0.0];
        let entries = vec![
            StoreEntry {
                unit_id: "M:one".into(),
                pair_id: "one".into(),
                kind: UnitKind::Method,
                partner_id: "T:one".into(),
                source_text: "int a() { return 1; }".into(),
                vector: planted(0.95, 1.0),
            },
            StoreEntry {
                unit_id: "T:one".into(),
                pair_id: "one".into(),
                kind: UnitKind::Test,
                partner_id: "M:one".into(),
                source_text: "void testA() { assertEquals(1, a()); }".into(),
                vector: vec![0.0, 0.0, 1.0],
            },
            StoreEntry {
                unit_id: "M:two".into(),
                pair_id: "two".into(),
                kind: UnitKind::Method,
                partner_id: "T:two".into(),
                source_text: "int b() { return 2; }".into(),
                vector: planted(0.89, -1.0),
            },
            StoreEntry {
                unit_id: "T:two".into(),
                pair_id: "two".into(),
                kind: UnitKind::Test,
                partner_id: "M:two".into(),
                source_text: "void testB() { assertEquals(2, b()); }".into(),
                vector: vec![0.0, 1.0, 1.0],
            },
        ];
        let store = EmbeddingStore::from_entries(3, entries).unwrap();
        let query = vec![1.0, 0.0, 0.0];

        let sims: Vec<f64> = above_threshold(&store, &query, UnitKind::Method, -1.0)
            .unwrap()
            .iter()
            .map(|h| h.similarity)
            .collect();
        assert!((sims[0] - 0.95).abs() < 1e-12 && (sims[1] - 0.89).abs() < 1e-12);

        let qualifying = above_threshold(&store, &query, UnitKind::Method, 0.90).unwrap();
        assert_eq!(qualifying.len(), 1, "exactly one method above 0.90");
        assert_eq!(qualifying[0].entry.unit_id, "M:one");

        let outcome = recommend_functionality_vec(&query, &store, 0.90, 5, None).unwrap();
        assert_eq!(outcome.candidates.len(), 1);
        let only = &outcome.candidates[0];
        assert_eq!(only.test_id, "T:one");
        assert_eq!(only.via_method_id.as_deref(), Some("M:one"));
        assert!((only.method_similarity.unwrap() - 0.95).abs() < 1e-12);
    });
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_07_end_to_end_duplicate_query() {
    criterion(7, "a duplicated query finds its partner test", || {
        // Two identical pairs: the query equals both methods, so the tie
        // on test similarity resolves by ascending id, and leave-one-out
        // must fall through to the twin.
        let method = "int total(int a, int b) { int s = a + b; if (s < 0) { s = -s; } return s; }";
        let test = "void testTotal() { int r = total(2, 3); assertEquals(5, r); }";
        let pairs = vec![
            CorpusPair { id: "a".into(), focal_method: method.into(), test_case: test.into() },
            CorpusPair { id: "b".into(), focal_method: method.into(), test_case: test.into() },
        ];
        let path_cfg = PathConfig::default();
        let (prepared, rejected) = prepare_corpus(&pairs, &path_cfg);
        assert!(rejected.is_empty(), "{rejected:?}");
        let bags = training_bags(&prepared);
        let vocab = Vocabulary::build(&bags, 1).unwrap();
        let cfg = ModelConfig {
            token_dim: 8,
            path_dim: 8,
            code_dim: 12,
            epochs: 3,
            ..ModelConfig::default()
        };
        let outcome = train(&bags, &vocab, &cfg).unwrap();
        let report = testrec::index::build_store(&prepared, &outcome.params, &vocab).unwrap();
        assert!(report.dropped.is_empty());
        let store = report.store;

        let query = embed_query(method, &outcome.params, &vocab, &path_cfg).unwrap();

        // Leave-one-out off: own partner test first, method similarity 1.
        let free = recommend_functionality_vec(&query, &store, 0.90, 5, None).unwrap();
        assert_eq!(free.candidates[0].test_id, "T:a");
        let sim = free.candidates[0].method_similarity.unwrap();
        assert!((sim - 1.0).abs() < 1e-6, "method similarity {sim}");
        assert_eq!(free.candidates[0].rank, 1);

        // Leave-one-out on: the nearest distinct method's test wins.
        let held = recommend_functionality_vec(&query, &store, 0.90, 5, Some("a")).unwrap();
        assert_eq!(held.candidates[0].test_id, "T:b");
        assert_eq!(held.candidates[0].via_method_id.as_deref(), Some("M:b"));
        assert!(held.candidates.iter().all(|c| c.pair_id != "a"));
    });
}

// ---------------------------------------------------------------- 8

/// The textbook recursive definition, memoized but never iterative.
fn recursive_lev(a: &[u8], b: &[u8], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let key = (a.len(), b.len());
    if let Some(&d) = memo.get(&key) {
        return d;
    }
    let sub = recursive_lev(&a[1..], &b[1..], memo) + usize::from(a[0] != b[0]);
    let del = recursive_lev(&a[1..], b, memo) + 1;
    let ins = recursive_lev(a, &b[1..], memo) + 1;
    let d = sub.min(del).min(ins);
    memo.insert(key, d);
    d
}

/// The same definition with no memo at all, affordable on short strings.
fn plain_recursive_lev(a: &[u8], b: &[u8]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let sub = plain_recursive_lev(&a[1..], &b[1..]) + usize::from(a[0] != b[0]);
    let del = plain_recursive_lev(&a[1..], b) + 1;
    let ins = plain_recursive_lev(a, &b[1..]) + 1;
    sub.min(del).min(ins)
}

#[test]
fn criterion_08_levenshtein() {
    criterion(8, "edit distance equals the recursive oracle", || {
        assert_eq!(char_distance("kitten", "sitting"), 3);

        // Every string over {a, b} of length <= 6.
        let mut strings = vec![String::new()];
        for len in 1..=6usize {
            for mask in 0..(1u32 << len) {
                let s: String = (0..len)
                    .map(|i| if mask >> i & 1 == 1 { 'b' } else { 'a' })
                    .collect();
                strings.push(s);
            }
        }
        assert_eq!(strings.len(), 127);
        let mut checked = 0usize;
        for x in &strings {
            for y in &strings {
                let mut memo = HashMap::new();
                let want = recursive_lev(x.as_bytes(), y.as_bytes(), &mut memo);
                assert_eq!(char_distance(x, y), want, "({x:?}, {y:?})");
                if x.len() <= 4 && y.len() <= 4 {
                    assert_eq!(plain_recursive_lev(x.as_bytes(), y.as_bytes()), want);
                }
                checked += 1;
            }
        }
        println!("  {checked} exhaustive pairs agreed with the recursion");

        // Metric axioms on random triples.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let word = |rng: &mut ChaCha8Rng| -> String {
            let len = rng.random_range(0..=10);
            (0..len)
                .map(|_| ['a', 'b', 'c'][rng.random_range(0..3)])
                .collect()
        };
        for _ in 0..10_000 {
            let (x, y, z) = (word(&mut rng), word(&mut rng), word(&mut rng));
            let (xy, yx) = (char_distance(&x, &y), char_distance(&y, &x));
            assert_eq!(xy, yx, "symmetry ({x:?}, {y:?})");
            assert_eq!(char_distance(&x, &x), 0, "identity ({x:?})");
            let (yz, xz) = (char_distance(&y, &z), char_distance(&x, &z));
            assert!(xz <= xy + yz, "triangle ({x:?}, {y:?}, {z:?})");
            let lens = (x.chars().count(), y.chars().count());
            assert!(xy >= lens.0.abs_diff(lens.1) && xy <= lens.0.max(lens.1));
        }
    });
}

// ---------------------------------------------------------------- 9

/// Lanczos approximation of ln Gamma, good to ~1e-14 relative.
fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = G[0];
    for (i, g) in G.iter().enumerate().skip(1) {
        acc += g / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Student t density with `df` degrees of freedom.
fn t_density(x: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0)
        - ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// Adaptive Simpson quadrature.
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    fn step(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// Welch statistic, degrees of freedom and two-sided p computed from the
/// raw samples with direct formulas and quadrature only.
fn oracle_welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let var = |s: &[f64]| {
        let m = mean(s);
        s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (s.len() as f64 - 1.0)
    };
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a), var(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    // Two-sided p: all density outside [-|t|, |t|].
    let inner = simpson(&|x| t_density(x, df), 0.0, t.abs(), 1e-13, 48);
    (t, df, 1.0 - 2.0 * inner)
}

#[test]
fn criterion_09_t_test() {
    criterion(9, "p-values match an integration oracle", || {
        // Identical samples with internal spread: t is exactly zero and
        // the two-sided p must be exactly one.
        let same = [1.0, 2.0, 3.5, 4.25];
        let r = welch_t_test(&same, &same).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);

        // Fully separated samples.
        let low = [0.10, 0.11, 0.12, 0.09, 0.10];
        let high = [5.0, 5.1, 4.9, 5.05, 5.2];
        let sep = welch_t_test(&low, &high).unwrap();
        assert!(sep.p < 0.001, "p = {}", sep.p);
        assert!(sep.significant());

        let fixtures: [(&[f64], &[f64]); 4] = [
            (&[1.1, 2.3, 3.1, 4.2, 5.0], &[2.0, 2.1, 3.9, 4.4, 6.1, 7.2]),
            (
                &[0.52, 0.44, 0.61, 0.49, 0.55, 0.50, 0.47],
                &[0.31, 0.42, 0.28, 0.35, 0.39],
            ),
            (&[12.4, 11.9, 13.2, 12.8], &[12.5, 12.1, 13.0, 12.6, 12.9]),
            (&low, &high),
        ];
        for (i, (a, b)) in fixtures.iter().enumerate() {
            let got = welch_t_test(a, b).unwrap();
            let (t, df, p) = oracle_welch(a, b);
            assert!(
                (got.t - t).abs() <= 1e-12 * t.abs().max(1.0),
                "fixture {i}: t {} vs {t}",
                got.t
            );
            assert!(
                (got.df - df).abs() <= 1e-12 * df,
                "fixture {i}: df {} vs {df}",
                got.df
            );
            assert!(
                (got.p - p).abs() < 1e-9,
                "fixture {i}: p {} vs {p} (|delta| = {:.3e})",
                got.p,
                (got.p - p).abs()
            );
            println!("  fixture {i}: p = {:.12} (oracle delta {:.2e})", got.p, (got.p - p).abs());
        }
    });
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_report_shapes() {
    criterion(10, "evaluation reproduces every table shape", || {
        use testrec::pipeline::{
            run_embed, run_eval, run_ingest, run_train, HISTOGRAM_FILE, RADAR_ALL_FILE,
            RADAR_APPROACH1_FILE, RADAR_APPROACH2_FILE,
        };
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = testrec::RunConfig::default();
        cfg.paths.corpus =
            concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/toy50.jsonl").into();
        cfg.paths.out_dir = dir.path().join("run");
        cfg.model.token_dim = 8;
        cfg.model.path_dim = 8;
        cfg.model.code_dim = 12;
        cfg.model.epochs = 2;
        run_ingest(&cfg).unwrap();
        run_train(&cfg).unwrap();
        run_embed(&cfg).unwrap();
        let artifacts = run_eval(&cfg).unwrap();
        let text = &artifacts.report_text;

        // Frequency table: exactly the two "lower than" rows over three
        // populations.
        for needle in ["Frequency of similarity", "lower than 50%", "lower than 70%"] {
            assert!(text.contains(needle), "missing {needle:?}");
        }
        let freq_row = text
            .lines()
            .find(|l| l.trim_start().starts_with("lower than 50%"))
            .unwrap();
        let cells: Vec<&str> = freq_row.split_whitespace().collect();
        assert_eq!(cells.len(), 3 + 3, "three percentage columns: {freq_row:?}");
        assert!(cells[3..].iter().all(|c| c.ends_with('%')));

        // Similarity table: six columns grouped as all-samples and the two
        // strategies, with the five statistic rows.
        let header = text.lines().find(|l| l.contains("Ma,Mb")).unwrap();
        let labels: Vec<&str> = header.split_whitespace().collect();
        assert_eq!(labels, ["Ma,Mb", "Ta,Tb", "Ma,Mb", "Ta,Tb", "Ma,Tb", "Ta,Tb"]);
        for row in ["Count", "Mean", "Std.", "Max.", "Min."] {
            let line = text
                .lines()
                .find(|l| l.trim_start().starts_with(row) && l.split_whitespace().count() == 7)
                .unwrap_or_else(|| panic!("similarity table misses row {row}"));
            assert_eq!(line.split_whitespace().count(), 7, "{row}: {line:?}");
        }

        // Edit-distance table: Lev. and Length per strategy.
        let lev_header = text.lines().find(|l| l.contains("Lev.")).unwrap();
        let lev_labels: Vec<&str> = lev_header.split_whitespace().collect();
        assert_eq!(lev_labels, ["Lev.", "Length", "Lev.", "Length"]);

        // Radar files carry one spoke per evaluated query.
        let radar_hdr = "pair_id,mm_sim,tt_sim";
        let all = std::fs::read_to_string(cfg.paths.in_out_dir(RADAR_ALL_FILE)).unwrap();
        assert!(all.starts_with(radar_hdr));
        let a1 = std::fs::read_to_string(cfg.paths.in_out_dir(RADAR_APPROACH1_FILE)).unwrap();
        let a2 = std::fs::read_to_string(cfg.paths.in_out_dir(RADAR_APPROACH2_FILE)).unwrap();
        let report = &artifacts.report;
        for (csv, eval) in [(&a1, &report.approach1), (&a2, &report.approach2)] {
            assert!(csv.starts_with(radar_hdr));
            let rows = csv.lines().count() - 1;
            assert_eq!(rows, eval.queries - eval.no_candidates);
            for line in csv.lines().skip(1) {
                assert_eq!(line.split(',').count(), 3, "{line:?}");
            }
        }

        // Histogram: forty uniform bins tiling [-1, 1], counts conserving
        // the pair population.
        let hist = std::fs::read_to_string(cfg.paths.in_out_dir(HISTOGRAM_FILE)).unwrap();
        let mut lines = hist.lines();
        assert_eq!(lines.next(), Some("bin_left,bin_right,count"));
        let mut total = 0usize;
        let mut prev_right: Option<f64> = None;
        let mut bins = 0usize;
        for line in lines {
            let parts: Vec<&str> = line.split(',').collect();
            assert_eq!(parts.len(), 3);
            let left: f64 = parts[0].parse().unwrap();
            let right: f64 = parts[1].parse().unwrap();
            if let Some(pr) = prev_right {
                assert!((left - pr).abs() < 1e-9, "bins must tile: {line:?}");
            } else {
                assert_eq!(left, -1.0);
            }
            prev_right = Some(right);
            total += parts[2].parse::<usize>().unwrap();
            bins += 1;
        }
        assert_eq!(bins, 40);
        assert_eq!(prev_right, Some(1.0));
        assert_eq!(total, 50, "histogram counts must conserve the pair count");

        // Frequency shares grow monotonically with the cutoff, in the
        // report object as well as in the rendering.
        let monotone = |rows: &[FrequencyRow]| {
            assert_eq!(rows.len(), 2);
            assert!(rows[0].percent <= rows[1].percent, "{rows:?}");
        };
        monotone(&report.all_samples_frequency);
        monotone(&report.approach1.frequency);
        monotone(&report.approach2.frequency);

        // The library histogram agrees with the exported file.
        let (store, _) = EmbeddingStore::load(&cfg.paths.store_path()).unwrap();
        let lib_total: usize =
            histogram_bins(&store).unwrap().iter().map(|b| b.count).sum();
        assert_eq!(lib_total, 50);
    });
}

// ---------------------------------------------------------------- 11

#[test]
fn criterion_11_determinism() {
    criterion(11, "identical seeds give identical bytes", || {
        use testrec::pipeline::{run_embed, run_eval, run_ingest, run_train};
        let run = |dir: &std::path::Path| -> std::collections::BTreeMap<String, Vec<u8>> {
            let mut cfg = testrec::RunConfig::default();
            cfg.paths.corpus =
                concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/toy50.jsonl").into();
            cfg.paths.out_dir = dir.join("run");
            cfg.model.token_dim = 8;
            cfg.model.path_dim = 8;
            cfg.model.code_dim = 12;
            cfg.model.epochs = 2;
            run_ingest(&cfg).unwrap();
            run_train(&cfg).unwrap();
            run_embed(&cfg).unwrap();
            run_eval(&cfg).unwrap();
            std::fs::read_dir(&cfg.paths.out_dir)
                .unwrap()
                .map(|e| {
                    let p = e.unwrap().path();
                    (
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        std::fs::read(&p).unwrap(),
                    )
                })
                .collect()
        };
        let first_dir = tempfile::tempdir().unwrap();
        let second_dir = tempfile::tempdir().unwrap();
        let first = run(first_dir.path());
        let second = run(second_dir.path());

        let names: Vec<&String> = first.keys().collect();
        assert_eq!(first.len(), second.len());
        for must in ["model.bin", "store.bin", "vocab.json", "report.txt", "report.json"] {
            assert!(first.contains_key(must), "missing {must} in {names:?}");
        }
        for (name, bytes) in &first {
            let twin = second.get(name).unwrap_or_else(|| panic!("{name} missing"));
            assert_eq!(bytes, twin, "{name} differs between reruns");
        }
        println!("  {} artifacts byte-identical across reruns", first.len());
    });
}
