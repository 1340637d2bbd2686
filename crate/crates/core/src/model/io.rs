//! Binary model files: all parameters, the shaping config, the hash of
//! the vocabulary the model was trained against, and the stamp of the run
//! configuration that produced it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::matrix::Matrix;
use super::{ModelConfig, ModelParams, Optimizer};
use crate::persist::*;
use crate::vocab::Vocabulary;

const MAGIC: &[u8; 8] = b"TRMODEL\0";
const VERSION: u32 = 1;
/// Upper bound on any matrix axis; keeps corrupt headers from causing
/// absurd allocations.
const MAX_DIM: u32 = 1 << 24;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("model file format error: {0}")]
    Format(String),
    #[error("unsupported model file version {0} (supported: {VERSION})")]
    Version(u32),
    #[error("model was trained against a different vocabulary")]
    VocabMismatch,
    #[error("failed to read or write model file: {0}")]
    Io(#[from] std::io::Error),
}

/// What a model file holds.
#[derive(Debug, Clone)]
pub struct SavedModel {
    pub params: ModelParams,
    pub config: ModelConfig,
    /// Hash of the run configuration that produced the file; callers
    /// compare it against their own configuration.
    pub run_stamp: [u8; 32],
}

pub fn save_model(
    path: &Path,
    params: &ModelParams,
    config: &ModelConfig,
    vocab: &Vocabulary,
    run_stamp: &[u8; 32],
) -> Result<(), ModelIoError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    write_u32(&mut w, VERSION)?;
    write_config(&mut w, config)?;
    w.write_all(&vocab.content_hash())?;
    w.write_all(run_stamp)?;
    write_matrix(&mut w, &params.value_embeddings)?;
    write_matrix(&mut w, &params.path_embeddings)?;
    write_matrix(&mut w, &params.combine_weights)?;
    write_u32(&mut w, 1)?;
    write_u32(&mut w, params.attention.len() as u32)?;
    write_f64_slice(&mut w, &params.attention)?;
    write_matrix(&mut w, &params.label_weights)?;
    w.flush()?;
    Ok(())
}

/// Load a model and check it against the vocabulary it will run with; a
/// content-hash mismatch is refused rather than silently misindexed.
pub fn load_model(path: &Path, vocab: &Vocabulary) -> Result<SavedModel, ModelIoError> {
    let mut r = BufReader::new(File::open(path)?);
    if !expect_magic(&mut r, MAGIC)? {
        return Err(ModelIoError::Format("bad magic; not a model file".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(ModelIoError::Version(version));
    }
    let config = read_config(&mut r)?;
    let stored_hash: [u8; 32] = read_array(&mut r)?;
    if stored_hash != vocab.content_hash() {
        return Err(ModelIoError::VocabMismatch);
    }
    let run_stamp: [u8; 32] = read_array(&mut r)?;

    let value_embeddings = read_matrix(&mut r)?;
    let path_embeddings = read_matrix(&mut r)?;
    let combine_weights = read_matrix(&mut r)?;
    let attention_mat = read_matrix(&mut r)?;
    let label_weights = read_matrix(&mut r)?;

    let expect = |cond: bool, what: &str| {
        if cond {
            Ok(())
        } else {
            Err(ModelIoError::Format(format!("{what} does not match the header config")))
        }
    };
    expect(attention_mat.rows() == 1, "attention shape")?;
    expect(attention_mat.cols() == config.code_dim, "attention width")?;
    expect(value_embeddings.rows() == vocab.value_table_len(), "value table height")?;
    expect(value_embeddings.cols() == config.token_dim, "value table width")?;
    expect(path_embeddings.rows() == vocab.path_table_len(), "path table height")?;
    expect(path_embeddings.cols() == config.path_dim, "path table width")?;
    expect(combine_weights.rows() == config.code_dim, "combine height")?;
    expect(combine_weights.cols() == config.context_dim(), "combine width")?;
    expect(label_weights.rows() == vocab.label_table_len(), "label table height")?;
    expect(label_weights.cols() == config.code_dim, "label table width")?;

    // A model file carries exactly these tensors and nothing else.
    let mut trailer = [0u8; 1];
    if r.read(&mut trailer)? != 0 {
        return Err(ModelIoError::Format("trailing bytes after parameters".into()));
    }

    Ok(SavedModel {
        params: ModelParams {
            value_embeddings,
            path_embeddings,
            combine_weights,
            attention: attention_mat.data().to_vec(),
            label_weights,
        },
        config,
        run_stamp,
    })
}

fn write_config(w: &mut impl Write, cfg: &ModelConfig) -> std::io::Result<()> {
    write_u32(w, cfg.token_dim as u32)?;
    write_u32(w, cfg.path_dim as u32)?;
    write_u32(w, cfg.code_dim as u32)?;
    write_u32(w, cfg.epochs as u32)?;
    write_f64(w, cfg.dropout_keep)?;
    write_f64(w, cfg.learning_rate)?;
    write_u8(w, match cfg.optimizer {
        Optimizer::Sgd => 0,
        Optimizer::Adam => 1,
    })?;
    write_u64(w, cfg.seed)
}

fn read_config(r: &mut impl Read) -> Result<ModelConfig, ModelIoError> {
    let token_dim = read_u32(r)? as usize;
    let path_dim = read_u32(r)? as usize;
    let code_dim = read_u32(r)? as usize;
    let epochs = read_u32(r)? as usize;
    let dropout_keep = read_f64(r)?;
    let learning_rate = read_f64(r)?;
    let optimizer = match read_u8(r)? {
        0 => Optimizer::Sgd,
        1 => Optimizer::Adam,
        other => return Err(ModelIoError::Format(format!("unknown optimizer tag {other}"))),
    };
    let seed = read_u64(r)?;
    Ok(ModelConfig {
        token_dim,
        path_dim,
        code_dim,
        epochs,
        dropout_keep,
        learning_rate,
        optimizer,
        seed,
    })
}

fn write_matrix(w: &mut impl Write, m: &Matrix) -> std::io::Result<()> {
    write_u32(w, m.rows() as u32)?;
    write_u32(w, m.cols() as u32)?;
    write_f64_slice(w, m.data())
}

fn read_matrix(r: &mut impl Read) -> Result<Matrix, ModelIoError> {
    let rows = read_u32(r)?;
    let cols = read_u32(r)?;
    if rows > MAX_DIM || cols > MAX_DIM || (rows as u64) * (cols as u64) > (1 << 30) {
        return Err(ModelIoError::Format(format!("implausible matrix shape {rows}x{cols}")));
    }
    let data = read_f64_vec(r, rows as usize * cols as usize)?;
    Ok(Matrix::from_vec(rows as usize, cols as usize, data))
}
