//! Test-case recommendation from learned code embeddings.
//!
//! The crate embeds Java-like methods and unit tests into a shared vector
//! space: each source unit is parsed into an AST, decomposed into
//! leaf-to-leaf path-contexts, and folded into a single code vector by an
//! attention network trained to predict method names. Recommendation is
//! nearest-neighbour retrieval over those vectors — either by functional
//! similarity between methods (reuse the tests of look-alike methods) or by
//! structural similarity between tests themselves.
//!
//! Pipeline stages, in dependency order:
//!
//! * [`frontend`] — tokenizer, recursive-descent parser, AST validation
//! * [`pathext`] — path-context extraction from validated ASTs
//! * [`vocab`] — frequency-ranked vocabularies for values, paths, labels
//! * [`model`] — attention encoder, hand-rolled backprop, Adam/SGD training
//! * [`index`] — embedding store and exact cosine retrieval
//! * [`recommend`] — the two recommendation strategies
//! * [`eval`] — similarity statistics, Welch t-test, edit-distance metrics
//! * [`pipeline`] — end-to-end commands backing the `testrec` binary

pub mod config;
pub mod corpus;
pub mod eval;
pub mod frontend;
pub mod index;
pub mod model;
pub mod pathext;
mod persist;
pub mod pipeline;
pub mod recommend;
pub mod vocab;

pub use config::RunConfig;
pub use frontend::{SourceUnit, UnitKind};
