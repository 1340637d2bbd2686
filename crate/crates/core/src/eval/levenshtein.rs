//! Edit distance between source snippets.
//!
//! Distances are taken over whitespace-normalized text so that formatting
//! differences (indentation, line breaks) don't register as edits.

/// Collapse every whitespace run to a single space and trim the ends.
pub fn normalize_source(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_ws = false;
    for ch in s.chars() {
        if ch.is_whitespace() {
            in_ws = true;
        } else {
            if in_ws && !out.is_empty() {
                out.push(' ');
            }
            in_ws = false;
            out.push(ch);
        }
    }
    out
}

/// Levenshtein distance (unit-cost insert/delete/substitute) between two
/// sequences, two-row dynamic programming, O(len(a)·len(b)) time and
/// O(min-row) space.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    // Keep the DP row over the shorter sequence.
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0usize; short.len() + 1];
    for (i, x) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in short.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// Character-level distance between whitespace-normalized snippets.
pub fn char_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = normalize_source(a).chars().collect();
    let b: Vec<char> = normalize_source(b).chars().collect();
    edit_distance(&a, &b)
}

/// Token-level distance: units are whitespace-separated tokens.
pub fn token_distance(a: &str, b: &str) -> usize {
    let a: Vec<&str> = a.split_whitespace().collect();
    let b: Vec<&str> = b.split_whitespace().collect();
    edit_distance(&a, &b)
}
