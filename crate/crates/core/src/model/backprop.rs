//! Exact gradients of the cross-entropy loss, derived by hand through the
//! attention encoder. Verified against finite differences in the tests.

use super::matrix::{axpy, dot, Matrix};
use super::{softmax, ModelError, ModelParams};
use crate::pathext::{ContextBag, PathContext};
use crate::vocab::Vocabulary;

/// Gradients with the same shapes as [`ModelParams`]. Embedding rows never
/// touched by the bag stay exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub value_embeddings: Matrix,
    pub path_embeddings: Matrix,
    pub combine_weights: Matrix,
    pub attention: Vec<f64>,
    pub label_weights: Matrix,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Gradients {
            value_embeddings: Matrix::zeros(
                params.value_embeddings.rows(),
                params.value_embeddings.cols(),
            ),
            path_embeddings: Matrix::zeros(
                params.path_embeddings.rows(),
                params.path_embeddings.cols(),
            ),
            combine_weights: Matrix::zeros(
                params.combine_weights.rows(),
                params.combine_weights.cols(),
            ),
            attention: vec![0.0; params.attention.len()],
            label_weights: Matrix::zeros(
                params.label_weights.rows(),
                params.label_weights.cols(),
            ),
        }
    }
}

struct TracedContext {
    value_rows: (usize, usize),
    path_row: usize,
    /// Raw concatenated context vector.
    raw: Vec<f64>,
    /// tanh-combined vector.
    combined: Vec<f64>,
}

fn trace_context(
    params: &ModelParams,
    ctx: &PathContext,
    vocab: &Vocabulary,
) -> TracedContext {
    let source_row = vocab.lookup_value(&ctx.source_value) as usize;
    let path_row = vocab.lookup_path(ctx.path_hash) as usize;
    let target_row = vocab.lookup_value(&ctx.target_value) as usize;
    let raw = super::embed_context(params, ctx, vocab);
    let combined = super::combine(params, &raw);
    TracedContext { value_rows: (source_row, target_row), path_row, raw, combined }
}

/// Loss and exact parameter gradients for one bag.
pub(crate) fn loss_and_grad(
    params: &ModelParams,
    bag: &ContextBag,
    vocab: &Vocabulary,
    label_index: u32,
) -> Result<(f64, Gradients), ModelError> {
    if bag.contexts.is_empty() {
        return Err(ModelError::EmptyBag);
    }
    let token_dim = params.value_embeddings.cols();
    let path_dim = params.path_embeddings.cols();

    // ---- forward, keeping every intermediate ----
    let traced: Vec<TracedContext> =
        bag.contexts.iter().map(|c| trace_context(params, c, vocab)).collect();
    let logits: Vec<f64> =
        traced.iter().map(|t| dot(&params.attention, &t.combined)).collect();
    let alpha = softmax(&logits);
    let mut code = vec![0.0; params.code_dim()];
    for (a, t) in alpha.iter().zip(&traced) {
        axpy(&mut code, *a, &t.combined);
    }
    let label_logits = params.label_weights.mul_vec(&code);
    let max = label_logits.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let lse = max + label_logits.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
    let loss = lse - label_logits[label_index as usize];

    // ---- backward ----
    let mut g = Gradients::zeros_like(params);

    // d loss / d label_logits = p - onehot(y)
    let mut d_label_logits = softmax(&label_logits);
    d_label_logits[label_index as usize] -= 1.0;

    // Label rows: d/dU[k] = d_label_logits[k] * code.
    g.label_weights.add_outer(1.0, &d_label_logits, &code);

    // d loss / d code = U^T (p - y)
    let d_code = params.label_weights.transpose_mul_vec(&d_label_logits);

    // Attention: d/d alpha_i = d_code . combined_i, then softmax backward.
    let d_alpha: Vec<f64> = traced.iter().map(|t| dot(&d_code, &t.combined)).collect();
    let weighted: f64 = alpha.iter().zip(&d_alpha).map(|(a, d)| a * d).sum();
    let d_logits: Vec<f64> =
        alpha.iter().zip(&d_alpha).map(|(a, d)| a * (d - weighted)).collect();

    for (i, t) in traced.iter().enumerate() {
        // d loss / d combined_i flows both through the weighted sum and the
        // attention logit.
        let mut d_combined = vec![0.0; params.code_dim()];
        axpy(&mut d_combined, alpha[i], &d_code);
        axpy(&mut d_combined, d_logits[i], &params.attention);

        // Attention vector: d/d a += d_logit_i * combined_i.
        axpy(&mut g.attention, d_logits[i], &t.combined);

        // Through tanh: d z = d combined * (1 - combined^2).
        let d_z: Vec<f64> = d_combined
            .iter()
            .zip(&t.combined)
            .map(|(d, c)| d * (1.0 - c * c))
            .collect();

        // Combine weights: d W += d_z (x) raw_i.
        g.combine_weights.add_outer(1.0, &d_z, &t.raw);

        // Into the raw context vector and down to the embedding rows.
        let d_raw = params.combine_weights.transpose_mul_vec(&d_z);
        let (src_row, tgt_row) = t.value_rows;
        axpy(g.value_embeddings.row_mut(src_row), 1.0, &d_raw[..token_dim]);
        axpy(
            g.path_embeddings.row_mut(t.path_row),
            1.0,
            &d_raw[token_dim..token_dim + path_dim],
        );
        axpy(g.value_embeddings.row_mut(tgt_row), 1.0, &d_raw[token_dim + path_dim..]);
    }

    Ok((loss, g))
}

/// Exact parameter gradients for one bag (no dropout applied).
pub fn grad(
    params: &ModelParams,
    bag: &ContextBag,
    vocab: &Vocabulary,
    label_index: u32,
) -> Result<Gradients, ModelError> {
    loss_and_grad(params, bag, vocab, label_index).map(|(_, g)| g)
}
