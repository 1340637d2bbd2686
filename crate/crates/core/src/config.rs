//! Run configuration: one self-describing TOML file covering every stage,
//! with CLI-flag overrides layered on top by the binary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{ModelConfig, Optimizer};
use crate::pathext::PathConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Input/output locations. Derived artifact paths default to fixed names
/// under the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Corpus of method/test pairs, one JSON object per line.
    pub corpus: PathBuf,
    /// Directory all artifacts are written under.
    pub out_dir: PathBuf,
    /// Override for the vocabulary artifact.
    pub vocab: Option<PathBuf>,
    /// Override for the trained model artifact.
    pub model: Option<PathBuf>,
    /// Override for the embedding store artifact.
    pub store: Option<PathBuf>,
}

impl Default for PathsSection {
    fn default() -> Self {
        PathsSection {
            corpus: PathBuf::from("corpus.jsonl"),
            out_dir: PathBuf::from("run"),
            vocab: None,
            model: None,
            store: None,
        }
    }
}

impl PathsSection {
    pub fn vocab_path(&self) -> PathBuf {
        self.vocab
            .clone()
            .unwrap_or_else(|| self.out_dir.join("vocab.json"))
    }

    pub fn model_path(&self) -> PathBuf {
        self.model
            .clone()
            .unwrap_or_else(|| self.out_dir.join("model.bin"))
    }

    pub fn store_path(&self) -> PathBuf {
        self.store
            .clone()
            .unwrap_or_else(|| self.out_dir.join("store.bin"))
    }

    pub fn in_out_dir(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Network hyperparameters (the run-level seed completes [`ModelConfig`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub token_dim: usize,
    pub path_dim: usize,
    pub code_dim: usize,
    pub epochs: usize,
    pub dropout_keep: f64,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
}

impl Default for ModelSection {
    fn default() -> Self {
        let m = ModelConfig::default();
        ModelSection {
            token_dim: m.token_dim,
            path_dim: m.path_dim,
            code_dim: m.code_dim,
            epochs: m.epochs,
            dropout_keep: m.dropout_keep,
            learning_rate: m.learning_rate,
            optimizer: m.optimizer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabSection {
    /// Minimum occurrences for a token/path to earn a vocabulary row.
    pub min_count: u64,
}

impl Default for VocabSection {
    fn default() -> Self {
        VocabSection { min_count: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommendSection {
    /// Similarity floor for matching methods (strictly greater than).
    pub tau_method: f64,
    /// Similarity floor for matching tests (strictly greater than).
    pub tau_test: f64,
    /// Recommendations returned per query.
    pub k: usize,
}

impl Default for RecommendSection {
    fn default() -> Self {
        RecommendSection {
            tau_method: crate::recommend::DEFAULT_TAU_METHOD,
            tau_test: crate::recommend::DEFAULT_TAU_TEST,
            k: crate::recommend::DEFAULT_TOP_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub leave_one_out: bool,
    pub token_level_levenshtein: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            leave_one_out: true,
            token_level_levenshtein: false,
        }
    }
}

/// Complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for initialization, shuffling and dropout.
    pub seed: Seed,
    pub paths: PathsSection,
    pub model: ModelSection,
    pub pathext: PathConfig,
    pub vocab: VocabSection,
    pub recommend: RecommendSection,
    pub eval: EvalSection,
}

/// Newtype so the top-level default (42) is expressible via `Default`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Default for Seed {
    fn default() -> Self {
        Seed(42)
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        RunConfig::from_toml_str(&text)
    }

    /// The completed network configuration (run seed filled in).
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            token_dim: self.model.token_dim,
            path_dim: self.model.path_dim,
            code_dim: self.model.code_dim,
            epochs: self.model.epochs,
            dropout_keep: self.model.dropout_keep,
            learning_rate: self.model.learning_rate,
            optimizer: self.model.optimizer,
            seed: self.seed.0,
        }
    }

    pub fn eval_options(&self) -> crate::eval::EvalOptions {
        crate::eval::EvalOptions {
            tau_method: self.recommend.tau_method,
            tau_test: self.recommend.tau_test,
            leave_one_out: self.eval.leave_one_out,
            token_level_levenshtein: self.eval.token_level_levenshtein,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check_tau = |name: &str, v: f64| {
            if !(-1.0..=1.0).contains(&v) || v.is_nan() {
                Err(ConfigError::Invalid(format!(
                    "{name} must lie in [-1, 1], got {v}"
                )))
            } else {
                Ok(())
            }
        };
        check_tau("recommend.tau_method", self.recommend.tau_method)?;
        check_tau("recommend.tau_test", self.recommend.tau_test)?;
        if self.recommend.k == 0 {
            return Err(ConfigError::Invalid("recommend.k must be >= 1".into()));
        }
        self.model_config()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.pathext.max_contexts == 0 {
            return Err(ConfigError::Invalid(
                "pathext.max_contexts must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Hash of the knobs that determine artifact bytes (training and
    /// embedding), stamped into the model and store so later stages refuse
    /// inputs built under different settings.  Query-time tuning
    /// (`recommend`) and report options (`eval`) are deliberately outside:
    /// changing them must not force a retrain.
    pub fn artifact_hash(&self) -> String {
        #[derive(Serialize)]
        struct ArtifactView<'a> {
            seed: u64,
            model: &'a ModelSection,
            pathext: &'a PathConfig,
            vocab: &'a VocabSection,
        }
        sha256_hex(&ArtifactView {
            seed: self.seed.0,
            model: &self.model,
            pathext: &self.pathext,
            vocab: &self.vocab,
        })
    }

    /// Hash of every semantic knob — everything except file locations —
    /// identifying the exact settings behind a recommendation or report.
    pub fn config_hash(&self) -> String {
        #[derive(Serialize)]
        struct Semantic<'a> {
            seed: u64,
            model: &'a ModelSection,
            pathext: &'a PathConfig,
            vocab: &'a VocabSection,
            recommend: &'a RecommendSection,
            eval: &'a EvalSection,
        }
        sha256_hex(&Semantic {
            seed: self.seed.0,
            model: &self.model,
            pathext: &self.pathext,
            vocab: &self.vocab,
            recommend: &self.recommend,
            eval: &self.eval,
        })
    }
}

fn sha256_hex<T: Serialize>(view: &T) -> String {
    let bytes = serde_json::to_vec(view).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
