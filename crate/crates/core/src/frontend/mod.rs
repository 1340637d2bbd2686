//! Source-level frontend: tokenizer, parser and AST validation.

pub mod ast;
pub mod lexer;
pub mod parser;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{Ast, AstNode, NodeId, NodeKind};
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse_method, ParseError};

/// Whether a source unit is a focal method or a unit test. The two kinds
/// live in the same vector space but are retrieved separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Method,
    Test,
}

impl UnitKind {
    /// Unit-id prefix: methods are `M:<pair>`, tests `T:<pair>`.
    pub fn id_prefix(self) -> &'static str {
        match self {
            UnitKind::Method => "M:",
            UnitKind::Test => "T:",
        }
    }

    pub fn unit_id(self, pair_id: &str) -> String {
        format!("{}{}", self.id_prefix(), pair_id)
    }
}

/// One method or test as it arrives from the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceUnit {
    pub id: String,
    pub kind: UnitKind,
    pub text: String,
}

/// Default bound on AST depth; deeper trees are rejected as degenerate.
pub const DEFAULT_MAX_DEPTH: usize = 64;

/// Why a parsed AST is still unusable for embedding.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RejectReason {
    #[error("method body contains no statements")]
    EmptyBody,
    #[error("fewer than two terminals ({count})")]
    TooFewTerminals { count: usize },
    #[error("tree depth {depth} exceeds maximum {max}")]
    TooDeep { depth: usize, max: usize },
}

/// Accept or reject a parsed AST for downstream processing.
///
/// Rejection reasons, checked in order: a method body with zero statements,
/// fewer than two terminals (no leaf pair exists), or nesting deeper than
/// `max_depth`.
pub fn validate_ast(ast: &Ast, max_depth: usize) -> Result<(), RejectReason> {
    let root = ast.node(ast.root());
    if root.kind == NodeKind::MethodDeclaration {
        let body_empty = root
            .children
            .iter()
            .rev()
            .map(|&c| ast.node(c))
            .find(|n| n.kind == NodeKind::Block)
            .is_none_or(|b| b.children.is_empty());
        if body_empty {
            return Err(RejectReason::EmptyBody);
        }
    }
    let count = ast.terminals().len();
    if count < 2 {
        return Err(RejectReason::TooFewTerminals { count });
    }
    let depth = ast.depth();
    if depth > max_depth {
        return Err(RejectReason::TooDeep { depth, max: max_depth });
    }
    Ok(())
}

/// Any way a source unit can fail to become a validated AST.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("rejected: {0}")]
    Reject(#[from] RejectReason),
}

/// Tokenize, parse and validate in one step.
pub fn parse_and_validate(text: &str, max_depth: usize) -> Result<Ast, FrontendError> {
    let tokens = tokenize(text)?;
    let ast = parse_method(&tokens)?;
    validate_ast(&ast, max_depth)?;
    Ok(ast)
}
