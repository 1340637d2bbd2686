//! Path-context extraction: decompose a validated AST into
//! ⟨source value, leaf-to-leaf path, target value⟩ triples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{Ast, NodeId, NodeKind};

/// 64-bit FNV-1a. Stable across platforms and releases; path hashes
/// computed with it are embedded in vocabularies and stored models.
pub fn stable_hash64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Caps on path shape and bag size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    /// Maximum number of edges in a path.
    pub max_length: usize,
    /// Maximum distance between the two child subtrees at the path's top.
    pub max_width: usize,
    /// Maximum contexts kept per bag; larger bags are down-sampled.
    pub max_contexts: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { max_length: 8, max_width: 2, max_contexts: 200 }
    }
}

/// Direction of one step along a path: towards the root or away from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// A leaf-to-leaf path: node kinds interleaved with step directions.
/// `kinds.len() == dirs.len() + 1`; the highest node is where direction
/// flips from `Up` to `Down`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstPath {
    pub kinds: Vec<NodeKind>,
    pub dirs: Vec<Direction>,
}

impl AstPath {
    /// Number of edges.
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Canonical spelling, e.g. `Name^Multiply_Name`: `^` climbs towards
    /// the root, `_` descends. Identity for hashing and vocabularies.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (i, kind) in self.kinds.iter().enumerate() {
            if i > 0 {
                out.push(match self.dirs[i - 1] {
                    Direction::Up => '^',
                    Direction::Down => '_',
                });
            }
            out.push_str(kind.name());
        }
        out
    }

    pub fn hash(&self) -> u64 {
        stable_hash64(self.canonical().as_bytes())
    }
}

/// One ⟨source, path, target⟩ triple with the path in both spelled and
/// hashed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathContext {
    pub source_value: String,
    pub path: String,
    pub path_hash: u64,
    pub target_value: String,
}

/// All contexts extracted from one source unit, labeled for training.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextBag {
    pub unit_id: String,
    pub label: String,
    pub contexts: Vec<PathContext>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no path-contexts survive extraction for unit {unit_id}")]
pub struct EmptyBag {
    pub unit_id: String,
}

/// Replacement value for the occurrence of the method's own name, so a
/// method never sees its own label during training.
pub const METHOD_NAME_MASK: &str = "METHOD_NAME";

/// Canonical spelling of a terminal value: identifiers and keywords are
/// lowercased; literals collapse to their category so `2` and `31` share
/// an embedding.
pub fn normalize_value(kind: NodeKind, raw: &str) -> String {
    match kind {
        NodeKind::NumberLiteral => "NUM".to_string(),
        NodeKind::StringLiteral => "STR".to_string(),
        NodeKind::CharLiteral => "CHR".to_string(),
        _ => raw.to_lowercase(),
    }
}

/// All unordered terminal pairs in source order: for leaves `t1..tn`,
/// yields `(ti, tj)` for every `i < j`.
pub fn enumerate_leaf_pairs(ast: &Ast) -> Vec<(NodeId, NodeId)> {
    let terminals = ast.terminals();
    let mut pairs = Vec::with_capacity(terminals.len() * (terminals.len().saturating_sub(1)) / 2);
    for i in 0..terminals.len() {
        for j in (i + 1)..terminals.len() {
            pairs.push((terminals[i], terminals[j]));
        }
    }
    pairs
}

/// The path from leaf `a` up to the lowest common ancestor and down to
/// leaf `b`. Panics if `a == b`; callers pair distinct leaves.
pub fn extract_path(ast: &Ast, a: NodeId, b: NodeId) -> AstPath {
    let parents = ast.parents();
    path_between(ast, &parents, a, b).0
}

/// Path plus its width: the distance between the two child positions at
/// the common ancestor.
fn path_between(
    ast: &Ast,
    parents: &[Option<NodeId>],
    a: NodeId,
    b: NodeId,
) -> (AstPath, usize) {
    assert_ne!(a, b, "a path needs two distinct leaves");

    let chain = |mut id: NodeId| {
        let mut out = vec![id];
        while let Some(p) = parents[id.index()] {
            out.push(p);
            id = p;
        }
        out
    };
    let chain_a = chain(a);
    let chain_b = chain(b);

    // Lowest common ancestor: walk back from the root while the chains agree.
    let mut ia = chain_a.len();
    let mut ib = chain_b.len();
    while ia > 0 && ib > 0 && chain_a[ia - 1] == chain_b[ib - 1] {
        ia -= 1;
        ib -= 1;
    }
    // chain_a[ia] is the LCA (the chains share at least the root).
    let lca = chain_a[ia];

    let mut kinds = Vec::with_capacity(ia + ib + 1);
    let mut dirs = Vec::with_capacity(ia + ib);
    for &id in &chain_a[..=ia] {
        if !kinds.is_empty() {
            dirs.push(Direction::Up);
        }
        kinds.push(ast.node(id).kind);
    }
    for &id in chain_b[..ib].iter().rev() {
        dirs.push(Direction::Down);
        kinds.push(ast.node(id).kind);
    }

    // Width: how far apart the two subtrees sit under the LCA. A leaf can
    // never be an ancestor of another leaf, so both chains step below the
    // LCA (ia >= 1 and ib >= 1).
    let top_a = chain_a[ia - 1];
    let top_b = chain_b[ib - 1];
    let children = &ast.node(lca).children;
    let pos = |id: NodeId| children.iter().position(|&c| c == id).expect("child of its parent");
    let width = pos(top_a).abs_diff(pos(top_b));
    (AstPath { kinds, dirs }, width)
}

/// Extract the capped, masked, deterministic context bag for one unit.
///
/// Pairs whose path exceeds `max_length` edges or `max_width` at the top
/// are discarded. If more than `max_contexts` survive, a subset is chosen
/// by a ChaCha8 stream seeded from the unit id (stable across runs and
/// platforms), preserving source order. The occurrence of the method's own
/// name is replaced by [`METHOD_NAME_MASK`].
pub fn extract_contexts(
    ast: &Ast,
    unit_id: &str,
    label: &str,
    cfg: &PathConfig,
) -> Result<ContextBag, EmptyBag> {
    let parents = ast.parents();
    let masked = ast.method_name_terminal();

    let value_of = |id: NodeId| -> String {
        if Some(id) == masked {
            return METHOD_NAME_MASK.to_string();
        }
        let node = ast.node(id);
        normalize_value(node.kind, node.value.as_deref().unwrap_or_default())
    };

    let mut contexts = Vec::new();
    for (a, b) in enumerate_leaf_pairs(ast) {
        let (path, width) = path_between(ast, &parents, a, b);
        if path.len() > cfg.max_length || width > cfg.max_width {
            continue;
        }
        contexts.push(PathContext {
            source_value: value_of(a),
            path: path.canonical(),
            path_hash: path.hash(),
            target_value: value_of(b),
        });
    }

    if contexts.len() > cfg.max_contexts {
        let mut rng = ChaCha8Rng::seed_from_u64(stable_hash64(unit_id.as_bytes()));
        let mut keep = rand::seq::index::sample(&mut rng, contexts.len(), cfg.max_contexts)
            .into_vec();
        keep.sort_unstable();
        contexts = keep.into_iter().map(|i| contexts[i].clone()).collect();
    }

    if contexts.is_empty() {
        return Err(EmptyBag { unit_id: unit_id.to_string() });
    }
    Ok(ContextBag {
        unit_id: unit_id.to_string(),
        label: label.to_string(),
        contexts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_method, tokenize};

    fn parse(text: &str) -> Ast {
        parse_method(&tokenize(text).unwrap()).unwrap()
    }

    fn wide_open() -> PathConfig {
        PathConfig { max_length: 64, max_width: 64, max_contexts: 100_000 }
    }

    #[test]
    fn fnv1a_matches_reference_vectors() {
        // Published FNV-1a 64-bit test vectors.
        assert_eq!(stable_hash64(b""), 0xcbf29ce484222325);
        assert_eq!(stable_hash64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(stable_hash64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn normalizes_values_by_kind() {
        assert_eq!(normalize_value(NodeKind::Name, "isEmpty"), "isempty");
        assert_eq!(normalize_value(NodeKind::Modifier, "PUBLIC"), "public");
        assert_eq!(normalize_value(NodeKind::NumberLiteral, "0x1F"), "NUM");
        assert_eq!(normalize_value(NodeKind::StringLiteral, "\"a b\""), "STR");
        assert_eq!(normalize_value(NodeKind::CharLiteral, "'q'"), "CHR");
        assert_eq!(normalize_value(NodeKind::BooleanLiteral, "true"), "true");
    }

    #[test]
    fn pair_count_is_n_choose_2() {
        let ast = parse("int sq(int n) { return n * n; }");
        // 6 terminals -> 15 pairs.
        assert_eq!(enumerate_leaf_pairs(&ast).len(), 15);
    }

    #[test]
    fn path_between_siblings_goes_through_parent() {
        let ast = parse("int sq(int n) { return n * n; }");
        let terminals = ast.terminals();
        // Last two terminals are the operands of the multiplication.
        let (a, b) = (terminals[4], terminals[5]);
        let path = extract_path(&ast, a, b);
        assert_eq!(path.canonical(), "Name^Multiply_Name");
        assert_eq!(path.len(), 2);
    }

    #[test]
    fn path_direction_flips_exactly_once() {
        let ast = parse("int sq(int n) { return n * n; }");
        for (a, b) in enumerate_leaf_pairs(&ast) {
            let path = extract_path(&ast, a, b);
            let mut seen_down = false;
            for d in &path.dirs {
                match d {
                    Direction::Down => seen_down = true,
                    Direction::Up => assert!(!seen_down, "up step after a down step"),
                }
            }
            assert_eq!(path.kinds.len(), path.dirs.len() + 1);
        }
    }

    #[test]
    fn path_endpoints_are_the_leaf_kinds() {
        let ast = parse("boolean g(int n) { return n == 0; }");
        for (a, b) in enumerate_leaf_pairs(&ast) {
            let path = extract_path(&ast, a, b);
            assert_eq!(path.kinds[0], ast.node(a).kind);
            assert_eq!(*path.kinds.last().unwrap(), ast.node(b).kind);
        }
    }

    #[test]
    fn method_name_is_masked() {
        let ast = parse("int sq(int n) { return n * n; }");
        let bag = extract_contexts(&ast, "M:x", "sq", &wide_open()).unwrap();
        let mentions_sq = bag
            .contexts
            .iter()
            .any(|c| c.source_value == "sq" || c.target_value == "sq");
        let mentions_mask = bag
            .contexts
            .iter()
            .any(|c| c.source_value == METHOD_NAME_MASK || c.target_value == METHOD_NAME_MASK);
        assert!(!mentions_sq, "raw method name leaked into contexts");
        assert!(mentions_mask);
    }

    #[test]
    fn length_cap_filters_long_paths() {
        let ast = parse("int sq(int n) { return n * n; }");
        let cfg = PathConfig { max_length: 2, max_width: 64, max_contexts: 100_000 };
        let bag = extract_contexts(&ast, "M:x", "sq", &cfg).unwrap();
        // Only sibling-ish pairs survive a 2-edge cap.
        for c in &bag.contexts {
            let edges = c.path.matches(['^', '_']).count();
            assert!(edges <= 2, "path {} has {edges} edges", c.path);
        }
        let full = extract_contexts(&ast, "M:x", "sq", &wide_open()).unwrap();
        assert!(bag.contexts.len() < full.contexts.len());
    }

    #[test]
    fn width_cap_filters_distant_siblings() {
        // Four statements in a block: leaves of the first and last statement
        // sit 3 apart at the block, beyond a width cap of 2.
        let ast = parse("void f() { a(); b(); c(); d(); }");
        let cfg = PathConfig { max_length: 64, max_width: 2, max_contexts: 100_000 };
        let bag = extract_contexts(&ast, "M:x", "f", &cfg).unwrap();
        assert!(!bag.contexts.iter().any(|c| c.source_value == "a" && c.target_value == "d"));
        assert!(bag.contexts.iter().any(|c| c.source_value == "a" && c.target_value == "c"));
    }

    #[test]
    fn sampling_is_deterministic_and_order_preserving() {
        let ast = parse(
            "int f(int a, int b, int c) { return a * b + b * c + a * c + a + b + c; }",
        );
        let cfg = PathConfig { max_length: 64, max_width: 64, max_contexts: 10 };
        let bag1 = extract_contexts(&ast, "M:x", "f", &cfg).unwrap();
        let bag2 = extract_contexts(&ast, "M:x", "f", &cfg).unwrap();
        assert_eq!(bag1, bag2);
        assert_eq!(bag1.contexts.len(), 10);

        // The kept subset preserves the full enumeration order.
        let full = extract_contexts(&ast, "M:x", "f", &wide_open()).unwrap();
        let mut cursor = 0;
        for kept in &bag1.contexts {
            let found = full.contexts[cursor..].iter().position(|c| c == kept);
            assert!(found.is_some(), "sampled context out of order");
            cursor += found.unwrap() + 1;
        }

        // A different unit id draws a different subset (with overwhelming
        // probability for this bag size).
        let other = extract_contexts(&ast, "M:y", "f", &cfg).unwrap();
        assert_ne!(bag1.contexts, other.contexts);
    }

    #[test]
    fn empty_bag_when_no_pair_survives() {
        let ast = parse("int sq(int n) { return n * n; }");
        let cfg = PathConfig { max_length: 0, max_width: 0, max_contexts: 10 };
        let err = extract_contexts(&ast, "M:x", "sq", &cfg).unwrap_err();
        assert_eq!(err.unit_id, "M:x");
    }

    #[test]
    fn hash_matches_canonical_string() {
        let ast = parse("int sq(int n) { return n * n; }");
        let bag = extract_contexts(&ast, "M:x", "sq", &wide_open()).unwrap();
        for c in &bag.contexts {
            assert_eq!(c.path_hash, stable_hash64(c.path.as_bytes()));
        }
    }
}
