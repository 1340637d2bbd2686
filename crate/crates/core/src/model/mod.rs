//! Attention encoder over path-contexts and its training machinery.
//!
//! A context ⟨source, path, target⟩ becomes the concatenation of three
//! embedding rows; a shared linear map plus `tanh` turns it into a
//! combined vector; softmax attention over a bag's combined vectors yields
//! one code vector; a label matrix predicts the method name from it.

mod backprop;
mod io;
mod matrix;
mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::UnitKind;
use crate::pathext::{ContextBag, PathContext};
use crate::vocab::Vocabulary;

pub use backprop::{grad, Gradients};
pub use io::{load_model, save_model, ModelIoError, SavedModel};
pub use matrix::{dot, Matrix};
pub use train::{train, TrainError, TrainOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

/// Everything that shapes the network and its training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Embedding width for terminal values.
    pub token_dim: usize,
    /// Embedding width for paths.
    pub path_dim: usize,
    /// Width of combined and code vectors.
    pub code_dim: usize,
    pub epochs: usize,
    /// Probability a context survives bag-level dropout during training.
    pub dropout_keep: f64,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            token_dim: 128,
            path_dim: 128,
            code_dim: 384,
            epochs: 9,
            dropout_keep: 0.75,
            learning_rate: 1e-3,
            optimizer: Optimizer::Adam,
            seed: 42,
        }
    }
}

impl ModelConfig {
    /// Width of a raw context vector: two value rows plus one path row.
    pub fn context_dim(&self) -> usize {
        2 * self.token_dim + self.path_dim
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.token_dim == 0 || self.path_dim == 0 || self.code_dim == 0 {
            return Err(ModelError::InvalidConfig("all dimensions must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(ModelError::InvalidConfig("epochs must be positive".into()));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(ModelError::InvalidConfig(
                "dropout_keep must lie in (0, 1]".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::InvalidConfig("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot encode an empty context bag")]
    EmptyBag,
}

/// All learned parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// One row per vocabulary value (including OOV and padding rows).
    pub value_embeddings: Matrix,
    /// One row per vocabulary path.
    pub path_embeddings: Matrix,
    /// Maps a raw context vector to the combined space: `code_dim x context_dim`.
    pub combine_weights: Matrix,
    /// Global attention vector, `code_dim` long.
    pub attention: Vec<f64>,
    /// One row per label: `label_table_len x code_dim`.
    pub label_weights: Matrix,
}

impl ModelParams {
    /// Fresh parameters drawn uniformly from ±0.05, shaped for `vocab`.
    pub fn init(cfg: &ModelConfig, vocab: &Vocabulary, rng: &mut impl Rng) -> Self {
        let mut fill = |rows: usize, cols: usize| {
            let mut m = Matrix::zeros(rows, cols);
            for v in m.data_mut() {
                *v = (rng.random::<f64>() - 0.5) * 0.1;
            }
            m
        };
        let value_embeddings = fill(vocab.value_table_len(), cfg.token_dim);
        let path_embeddings = fill(vocab.path_table_len(), cfg.path_dim);
        let combine_weights = fill(cfg.code_dim, cfg.context_dim());
        let label_weights = fill(vocab.label_table_len(), cfg.code_dim);
        let mut attention = vec![0.0; cfg.code_dim];
        for v in &mut attention {
            *v = (rng.random::<f64>() - 0.5) * 0.1;
        }
        ModelParams {
            value_embeddings,
            path_embeddings,
            combine_weights,
            attention,
            label_weights,
        }
    }

    pub fn code_dim(&self) -> usize {
        self.attention.len()
    }

    pub fn context_dim(&self) -> usize {
        self.combine_weights.cols()
    }
}

/// A unit's final embedding together with its identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeVector {
    pub unit_id: String,
    pub kind: UnitKind,
    pub values: Vec<f64>,
}

/// Concatenate the three embedding rows for one context:
/// `[value(source); path; value(target)]`.
pub fn embed_context(params: &ModelParams, ctx: &PathContext, vocab: &Vocabulary) -> Vec<f64> {
    let source = params.value_embeddings.row(vocab.lookup_value(&ctx.source_value) as usize);
    let path = params.path_embeddings.row(vocab.lookup_path(ctx.path_hash) as usize);
    let target = params.value_embeddings.row(vocab.lookup_value(&ctx.target_value) as usize);
    let mut out = Vec::with_capacity(source.len() + path.len() + target.len());
    out.extend_from_slice(source);
    out.extend_from_slice(path);
    out.extend_from_slice(target);
    out
}

/// `tanh(W * context_vec)`, the combined context vector.
pub fn combine(params: &ModelParams, context_vec: &[f64]) -> Vec<f64> {
    let mut z = params.combine_weights.mul_vec(context_vec);
    for v in &mut z {
        *v = v.tanh();
    }
    z
}

/// Softmax attention over combined vectors. The logit maximum is
/// subtracted before exponentiation, so weights are finite for any input
/// magnitude; they are positive and sum to 1.
pub fn attention_weights(params: &ModelParams, combined: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    if combined.is_empty() {
        return Err(ModelError::EmptyBag);
    }
    let logits: Vec<f64> = combined.iter().map(|c| dot(&params.attention, c)).collect();
    Ok(softmax(&logits))
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Attention-weighted sum of the bag's combined vectors.
pub fn code_vector(
    params: &ModelParams,
    bag: &ContextBag,
    vocab: &Vocabulary,
) -> Result<Vec<f64>, ModelError> {
    let combined: Vec<Vec<f64>> = bag
        .contexts
        .iter()
        .map(|ctx| combine(params, &embed_context(params, ctx, vocab)))
        .collect();
    let alpha = attention_weights(params, &combined)?;
    let mut v = vec![0.0; params.code_dim()];
    for (a, c) in alpha.iter().zip(&combined) {
        matrix::axpy(&mut v, *a, c);
    }
    Ok(v)
}

/// Embed a whole unit, carrying its identity along.
pub fn embed_unit(
    params: &ModelParams,
    bag: &ContextBag,
    vocab: &Vocabulary,
    kind: UnitKind,
) -> Result<CodeVector, ModelError> {
    Ok(CodeVector {
        unit_id: bag.unit_id.clone(),
        kind,
        values: code_vector(params, bag, vocab)?,
    })
}

/// Probability distribution over all label rows.
pub fn predict_label(params: &ModelParams, code_vec: &[f64]) -> Vec<f64> {
    softmax(&params.label_weights.mul_vec(code_vec))
}

/// Cross-entropy of the true label under the model, computed through
/// log-sum-exp so extreme logits cannot produce infinities prematurely.
pub fn loss(
    params: &ModelParams,
    bag: &ContextBag,
    vocab: &Vocabulary,
    label_index: u32,
) -> Result<f64, ModelError> {
    let v = code_vector(params, bag, vocab)?;
    let logits = params.label_weights.mul_vec(&v);
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let lse = max + logits.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
    Ok(lse - logits[label_index as usize])
}
