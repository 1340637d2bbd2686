//! Recursive-descent parser for single method declarations.
//!
//! The accepted language is the Java subset that dominates unit-test
//! corpora: annotated method declarations with parameters and a `throws`
//! clause, the usual statements (blocks, `if`/`else`, `while`, `do`,
//! both `for` forms, `try`/`catch`/`finally`, `return`, `throw`, local
//! variable declarations, expression statements) and expressions
//! (assignments, ternary, the full binary/unary operator ladder, chained
//! calls and field accesses, array indexing, `new`, literals, `.class`).
//! Generics, lambdas, casts, anonymous classes, multi-dimensional arrays
//! and nested method declarations are all outside the grammar and fail
//! with a [`ParseError`].

use thiserror::Error;

use super::ast::{Ast, AstBuilder, NodeId, NodeKind};
use super::lexer::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: expected {expected}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
}

/// Hard recursion bound; a safety net against stack overflow on
/// pathological nesting. Semantic depth limits live in AST validation.
const MAX_RECURSION: usize = 512;

const MODIFIERS: &[&str] = &[
    "public", "private", "protected", "static", "final", "abstract", "synchronized", "native",
    "strictfp", "transient", "volatile", "default",
];

const PRIMITIVES: &[&str] =
    &["boolean", "byte", "char", "short", "int", "long", "float", "double", "void"];

/// Parse one complete method declaration covering the whole token stream.
pub fn parse_method(tokens: &[Token]) -> Result<Ast, ParseError> {
    let mut p = Parser { tokens, pos: 0, depth: 0, builder: AstBuilder::new() };
    let root = p.method_declaration()?;
    if p.pos != p.tokens.len() {
        return Err(p.error_here("end of input"));
    }
    Ok(p.builder.finish(root))
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: usize,
    builder: AstBuilder,
}

impl<'t> Parser<'t> {
    // ----- token plumbing ---------------------------------------------------

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, ahead: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + ahead)
    }

    fn advance(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_punct(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Punctuation && t.lexeme == s)
    }

    fn at_operator(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Operator && t.lexeme == s)
    }

    fn at_keyword(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Keyword && t.lexeme == s)
    }

    fn eat_punct(&mut self, s: &str) -> bool {
        if self.at_punct(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_operator(&mut self, s: &str) -> bool {
        if self.at_operator(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, s: &str) -> bool {
        if self.at_keyword(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_punct(s) {
            Ok(())
        } else {
            Err(self.error_here(&format!("'{s}'")))
        }
    }

    fn expect_keyword(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_keyword(s) {
            Ok(())
        } else {
            Err(self.error_here(&format!("'{s}'")))
        }
    }

    fn expect_identifier(&mut self) -> Result<&'t Token, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.error_here("an identifier")),
        }
    }

    /// End-of-input errors point one past the last token.
    fn error_here(&self, expected: &str) -> ParseError {
        let offset = match self.peek() {
            Some(t) => t.offset,
            None => self.tokens.last().map_or(0, |t| t.offset + t.lexeme.len()),
        };
        ParseError { offset, expected: expected.to_string() }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_RECURSION {
            return Err(self.error_here("shallower nesting"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    // ----- declarations -----------------------------------------------------

    fn method_declaration(&mut self) -> Result<NodeId, ParseError> {
        let mut children = Vec::new();

        while self.peek().is_some_and(|t| t.kind == TokenKind::Annotation) {
            let ann = self.annotation()?;
            children.push(ann);
        }
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword && MODIFIERS.contains(&t.lexeme.as_str()) {
                self.pos += 1;
                children.push(self.builder.terminal(NodeKind::Modifier, &t.lexeme));
            } else {
                break;
            }
        }

        children.push(self.type_ref()?);
        let name = self.expect_identifier()?;
        children.push(self.builder.terminal(NodeKind::Name, &name.lexeme));

        self.expect_punct("(")?;
        if !self.at_punct(")") {
            let mut params = vec![self.parameter()?];
            while self.eat_punct(",") {
                params.push(self.parameter()?);
            }
            children.push(self.builder.interior(NodeKind::ParameterList, params));
        }
        self.expect_punct(")")?;

        if self.eat_keyword("throws") {
            let mut names = vec![self.qualified_type_name()?];
            while self.eat_punct(",") {
                names.push(self.qualified_type_name()?);
            }
            children.push(self.builder.interior(NodeKind::ThrowsClause, names));
        }

        children.push(self.block()?);
        Ok(self.builder.interior(NodeKind::MethodDeclaration, children))
    }

    fn annotation(&mut self) -> Result<NodeId, ParseError> {
        let tok = self.advance().expect("caller saw an annotation token");
        let mut children = vec![self.builder.terminal(NodeKind::Name, &tok.lexeme)];
        if self.eat_punct("(") {
            if !self.at_punct(")") {
                children.push(self.annotation_arg()?);
                while self.eat_punct(",") {
                    children.push(self.annotation_arg()?);
                }
            }
            self.expect_punct(")")?;
        }
        Ok(self.builder.interior(NodeKind::Annotation, children))
    }

    fn annotation_arg(&mut self) -> Result<NodeId, ParseError> {
        // Either `name = expr` or a bare expression.
        let mut children = Vec::new();
        if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier)
            && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Operator && t.lexeme == "=")
        {
            let name = self.advance().expect("peeked identifier");
            self.pos += 1; // '='
            children.push(self.builder.terminal(NodeKind::Name, &name.lexeme));
        }
        children.push(self.expression()?);
        Ok(self.builder.interior(NodeKind::AnnotationArg, children))
    }

    /// A type usable as a return type, parameter type or throws entry:
    /// primitive or (possibly qualified) class name, with at most one `[]`.
    fn type_ref(&mut self) -> Result<NodeId, ParseError> {
        let base = if let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.lexeme.as_str()) {
                self.pos += 1;
                self.builder.terminal(NodeKind::PrimitiveType, &t.lexeme)
            } else {
                self.qualified_type_name()?
            }
        } else {
            return Err(self.error_here("a type"));
        };
        self.maybe_array_type(base)
    }

    fn qualified_type_name(&mut self) -> Result<NodeId, ParseError> {
        let first = self.expect_identifier()?;
        let mut names = vec![self.builder.terminal(NodeKind::Name, &first.lexeme)];
        while self.at_punct(".")
            && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier)
        {
            self.pos += 1;
            let part = self.advance().expect("peeked identifier");
            names.push(self.builder.terminal(NodeKind::Name, &part.lexeme));
        }
        Ok(self.builder.interior(NodeKind::TypeRef, names))
    }

    fn maybe_array_type(&mut self, base: NodeId) -> Result<NodeId, ParseError> {
        if self.at_punct("[") && self.peek_at(1).is_some_and(|t| t.lexeme == "]") {
            self.pos += 2;
            if self.at_punct("[") {
                return Err(self.error_here("a single-dimensional array type"));
            }
            return Ok(self.builder.interior(NodeKind::ArrayType, vec![base]));
        }
        Ok(base)
    }

    fn parameter(&mut self) -> Result<NodeId, ParseError> {
        let mut children = Vec::new();
        if self.at_keyword("final") {
            self.pos += 1;
            children.push(self.builder.terminal(NodeKind::Modifier, "final"));
        }
        let ty = self.type_ref()?;
        children.push(ty);
        let name = self.expect_identifier()?;
        children.push(self.builder.terminal(NodeKind::Name, &name.lexeme));
        Ok(self.builder.interior(NodeKind::Parameter, children))
    }

    // ----- statements -------------------------------------------------------

    fn block(&mut self) -> Result<NodeId, ParseError> {
        self.enter()?;
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.at_punct("}") {
            if self.peek().is_none() {
                return Err(self.error_here("'}'"));
            }
            stmts.push(self.statement()?);
        }
        self.pos += 1; // '}'
        self.leave();
        Ok(self.builder.interior(NodeKind::Block, stmts))
    }

    fn statement(&mut self) -> Result<NodeId, ParseError> {
        self.enter()?;
        let node = self.statement_inner();
        self.leave();
        node
    }

    fn statement_inner(&mut self) -> Result<NodeId, ParseError> {
        if self.at_punct("{") {
            return self.block();
        }
        if self.at_keyword("if") {
            return self.if_statement();
        }
        if self.at_keyword("while") {
            self.pos += 1;
            self.expect_punct("(")?;
            let cond = self.expression()?;
            self.expect_punct(")")?;
            let body = self.statement()?;
            return Ok(self.builder.interior(NodeKind::WhileStatement, vec![cond, body]));
        }
        if self.at_keyword("do") {
            self.pos += 1;
            let body = self.statement()?;
            self.expect_keyword("while")?;
            self.expect_punct("(")?;
            let cond = self.expression()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            return Ok(self.builder.interior(NodeKind::DoStatement, vec![body, cond]));
        }
        if self.at_keyword("for") {
            return self.for_statement();
        }
        if self.at_keyword("try") {
            return self.try_statement();
        }
        if self.at_keyword("return") {
            self.pos += 1;
            let mut children = Vec::new();
            if !self.at_punct(";") {
                children.push(self.expression()?);
            }
            self.expect_punct(";")?;
            return Ok(self.builder.interior(NodeKind::ReturnStatement, children));
        }
        if self.at_keyword("throw") {
            self.pos += 1;
            let value = self.expression()?;
            self.expect_punct(";")?;
            return Ok(self.builder.interior(NodeKind::ThrowStatement, vec![value]));
        }
        if self.at_keyword("break") {
            self.pos += 1;
            self.expect_punct(";")?;
            return Ok(self.builder.interior(NodeKind::BreakStatement, vec![]));
        }
        if self.at_keyword("continue") {
            self.pos += 1;
            self.expect_punct(";")?;
            return Ok(self.builder.interior(NodeKind::ContinueStatement, vec![]));
        }
        if self.looks_like_local_decl() {
            let decl = self.local_var_decl()?;
            self.expect_punct(";")?;
            return Ok(decl);
        }
        let expr = self.expression()?;
        self.expect_punct(";")?;
        Ok(self.builder.interior(NodeKind::ExpressionStatement, vec![expr]))
    }

    fn if_statement(&mut self) -> Result<NodeId, ParseError> {
        self.pos += 1; // 'if'
        self.expect_punct("(")?;
        let cond = self.expression()?;
        self.expect_punct(")")?;
        let then = self.statement()?;
        let mut children = vec![cond, then];
        if self.eat_keyword("else") {
            children.push(self.statement()?);
        }
        Ok(self.builder.interior(NodeKind::IfStatement, children))
    }

    fn for_statement(&mut self) -> Result<NodeId, ParseError> {
        self.pos += 1; // 'for'
        self.expect_punct("(")?;

        // Enhanced form: `for (Type name : iterable) body`.
        if let Some(colon_param) = self.try_enhanced_for_header()? {
            let iterable = self.expression()?;
            self.expect_punct(")")?;
            let body = self.statement()?;
            return Ok(self
                .builder
                .interior(NodeKind::ForStatement, vec![colon_param, iterable, body]));
        }

        let mut children = Vec::new();
        if !self.eat_punct(";") {
            if self.looks_like_local_decl() {
                children.push(self.local_var_decl()?);
            } else {
                let expr = self.expression()?;
                children.push(self.builder.interior(NodeKind::ExpressionStatement, vec![expr]));
            }
            self.expect_punct(";")?;
        }
        if !self.at_punct(";") {
            children.push(self.expression()?);
        }
        self.expect_punct(";")?;
        if !self.at_punct(")") {
            children.push(self.expression()?);
            while self.eat_punct(",") {
                children.push(self.expression()?);
            }
        }
        self.expect_punct(")")?;
        children.push(self.statement()?);
        Ok(self.builder.interior(NodeKind::ForStatement, children))
    }

    /// Consume `[final] Type name :` if that is what follows (checked by
    /// pure lookahead first), else leave the position untouched.
    fn try_enhanced_for_header(&mut self) -> Result<Option<NodeId>, ParseError> {
        if !self.looks_like_enhanced_for() {
            return Ok(None);
        }
        let mut children = Vec::new();
        if self.at_keyword("final") {
            self.pos += 1;
            children.push(self.builder.terminal(NodeKind::Modifier, "final"));
        }
        let ty = self.type_ref()?;
        children.push(ty);
        let name = self.expect_identifier()?;
        children.push(self.builder.terminal(NodeKind::Name, &name.lexeme));
        if !self.eat_operator(":") {
            return Err(self.error_here("':'"));
        }
        Ok(Some(self.builder.interior(NodeKind::Parameter, children)))
    }

    /// Pure lookahead for `[final] Type name :` without building nodes.
    fn looks_like_enhanced_for(&self) -> bool {
        let mut i = self.pos;
        let at = |i: usize| self.tokens.get(i);
        if at(i).is_some_and(|t| t.kind == TokenKind::Keyword && t.lexeme == "final") {
            i += 1;
        }
        // Type: primitive or qualified name, optional single [].
        match at(i) {
            Some(t) if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.lexeme.as_str()) => {
                i += 1;
            }
            Some(t) if t.kind == TokenKind::Identifier => {
                i += 1;
                while at(i).is_some_and(|t| t.lexeme == ".")
                    && at(i + 1).is_some_and(|t| t.kind == TokenKind::Identifier)
                {
                    i += 2;
                }
            }
            _ => return false,
        }
        if at(i).is_some_and(|t| t.lexeme == "[") && at(i + 1).is_some_and(|t| t.lexeme == "]") {
            i += 2;
        }
        if !at(i).is_some_and(|t| t.kind == TokenKind::Identifier) {
            return false;
        }
        i += 1;
        at(i).is_some_and(|t| t.kind == TokenKind::Operator && t.lexeme == ":")
    }

    fn try_statement(&mut self) -> Result<NodeId, ParseError> {
        self.pos += 1; // 'try'
        let mut children = vec![self.block()?];
        let mut clauses = 0;
        while self.at_keyword("catch") {
            self.pos += 1;
            self.expect_punct("(")?;
            let ty = self.type_ref()?;
            let name = self.expect_identifier()?;
            let name_id = self.builder.terminal(NodeKind::Name, &name.lexeme);
            let param = self.builder.interior(NodeKind::Parameter, vec![ty, name_id]);
            self.expect_punct(")")?;
            let body = self.block()?;
            children.push(self.builder.interior(NodeKind::CatchClause, vec![param, body]));
            clauses += 1;
        }
        if self.eat_keyword("finally") {
            let body = self.block()?;
            children.push(self.builder.interior(NodeKind::FinallyClause, vec![body]));
            clauses += 1;
        }
        if clauses == 0 {
            return Err(self.error_here("'catch' or 'finally'"));
        }
        Ok(self.builder.interior(NodeKind::TryStatement, children))
    }

    /// Lookahead: does a local variable declaration start here?
    /// Accepts `[final] (primitive | Qualified.Name) [\[\]] identifier` with
    /// the following token one of `=`, `,`, `;` or `[` (C-style array).
    fn looks_like_local_decl(&self) -> bool {
        let mut i = self.pos;
        let at = |i: usize| self.tokens.get(i);
        if at(i).is_some_and(|t| t.kind == TokenKind::Keyword && t.lexeme == "final") {
            i += 1;
        }
        match at(i) {
            Some(t) if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.lexeme.as_str()) => {
                i += 1;
            }
            Some(t) if t.kind == TokenKind::Identifier => {
                i += 1;
                while at(i).is_some_and(|t| t.lexeme == ".")
                    && at(i + 1).is_some_and(|t| t.kind == TokenKind::Identifier)
                {
                    i += 2;
                }
            }
            _ => return false,
        }
        if at(i).is_some_and(|t| t.lexeme == "[") && at(i + 1).is_some_and(|t| t.lexeme == "]") {
            i += 2;
        }
        if !at(i).is_some_and(|t| t.kind == TokenKind::Identifier) {
            return false;
        }
        i += 1;
        matches!(at(i), Some(t) if t.lexeme == "=" || t.lexeme == "," || t.lexeme == ";" || t.lexeme == "[")
    }

    /// `[final] Type declarator (, declarator)*` without the trailing `;`.
    fn local_var_decl(&mut self) -> Result<NodeId, ParseError> {
        let mut children = Vec::new();
        if self.at_keyword("final") {
            self.pos += 1;
            children.push(self.builder.terminal(NodeKind::Modifier, "final"));
        }
        children.push(self.type_ref()?);
        children.push(self.var_declarator()?);
        while self.eat_punct(",") {
            children.push(self.var_declarator()?);
        }
        Ok(self.builder.interior(NodeKind::LocalVarDecl, children))
    }

    fn var_declarator(&mut self) -> Result<NodeId, ParseError> {
        let name = self.expect_identifier()?;
        let mut children = vec![self.builder.terminal(NodeKind::Name, &name.lexeme)];
        // C-style `int a[]`.
        if self.at_punct("[") && self.peek_at(1).is_some_and(|t| t.lexeme == "]") {
            self.pos += 2;
            if self.at_punct("[") {
                return Err(self.error_here("a single-dimensional array declarator"));
            }
        }
        if self.eat_operator("=") {
            if self.at_punct("{") {
                children.push(self.array_initializer()?);
            } else {
                children.push(self.expression()?);
            }
        }
        Ok(self.builder.interior(NodeKind::VarDeclarator, children))
    }

    fn array_initializer(&mut self) -> Result<NodeId, ParseError> {
        self.enter()?;
        self.expect_punct("{")?;
        let mut items = Vec::new();
        if !self.at_punct("}") {
            items.push(self.expression()?);
            while self.eat_punct(",") {
                if self.at_punct("}") {
                    break; // trailing comma
                }
                items.push(self.expression()?);
            }
        }
        self.expect_punct("}")?;
        self.leave();
        Ok(self.builder.interior(NodeKind::ArrayInitializer, items))
    }

    // ----- expressions ------------------------------------------------------

    fn expression(&mut self) -> Result<NodeId, ParseError> {
        self.enter()?;
        let node = self.assignment();
        self.leave();
        node
    }

    fn assignment(&mut self) -> Result<NodeId, ParseError> {
        let target = self.ternary()?;
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Operator => match t.lexeme.as_str() {
                "=" => Some(NodeKind::Assignment),
                "+=" => Some(NodeKind::AssignAdd),
                "-=" => Some(NodeKind::AssignSubtract),
                "*=" => Some(NodeKind::AssignMultiply),
                "/=" => Some(NodeKind::AssignDivide),
                "%=" => Some(NodeKind::AssignModulo),
                _ => None,
            },
            _ => None,
        };
        let Some(kind) = op else { return Ok(target) };
        if !self.is_assignable(target) {
            return Err(self.error_here("an assignable expression before the assignment operator"));
        }
        self.pos += 1;
        let value = self.assignment()?;
        Ok(self.builder.interior(kind, vec![target, value]))
    }

    fn is_assignable(&self, id: NodeId) -> bool {
        matches!(
            self.builder.kind_of(id),
            NodeKind::Name | NodeKind::FieldAccess | NodeKind::ArrayAccess
        )
    }

    fn ternary(&mut self) -> Result<NodeId, ParseError> {
        let cond = self.binary(0)?;
        if self.eat_operator("?") {
            let then = self.expression()?;
            if !self.eat_operator(":") {
                return Err(self.error_here("':'"));
            }
            let els = self.ternary()?;
            return Ok(self.builder.interior(NodeKind::Conditional, vec![cond, then, els]));
        }
        Ok(cond)
    }

    /// Precedence-climbing over the binary operator ladder.
    fn binary(&mut self, level: usize) -> Result<NodeId, ParseError> {
        const LEVELS: &[&[(&str, NodeKind)]] = &[
            &[("||", NodeKind::Or)],
            &[("&&", NodeKind::And)],
            &[("|", NodeKind::BitOr)],
            &[("^", NodeKind::BitXor)],
            &[("&", NodeKind::BitAnd)],
            &[("==", NodeKind::Equals), ("!=", NodeKind::NotEquals)],
            &[
                ("<=", NodeKind::LessEq),
                (">=", NodeKind::GreaterEq),
                ("<", NodeKind::Less),
                (">", NodeKind::Greater),
            ],
            &[
                ("<<", NodeKind::ShiftLeft),
                (">>>", NodeKind::ShiftRightUnsigned),
                (">>", NodeKind::ShiftRight),
            ],
            &[("+", NodeKind::Add), ("-", NodeKind::Subtract)],
            &[("*", NodeKind::Multiply), ("/", NodeKind::Divide), ("%", NodeKind::Modulo)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            // `instanceof` sits at relational precedence.
            if LEVELS[level][0].0 == "<=" && self.at_keyword("instanceof") {
                self.pos += 1;
                let ty = self.type_ref()?;
                lhs = self.builder.interior(NodeKind::InstanceOf, vec![lhs, ty]);
                continue;
            }
            let found = LEVELS[level].iter().find(|(op, _)| self.at_operator(op));
            let Some(&(op, kind)) = found else { break };
            let _ = op;
            self.pos += 1;
            let rhs = self.binary(level + 1)?;
            lhs = self.builder.interior(kind, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<NodeId, ParseError> {
        self.enter()?;
        let node = self.unary_inner();
        self.leave();
        node
    }

    fn unary_inner(&mut self) -> Result<NodeId, ParseError> {
        let prefix = match self.peek() {
            Some(t) if t.kind == TokenKind::Operator => match t.lexeme.as_str() {
                "!" => Some(NodeKind::Not),
                "-" => Some(NodeKind::Negate),
                "+" => Some(NodeKind::UnaryPlus),
                "~" => Some(NodeKind::BitNot),
                "++" => Some(NodeKind::PreIncrement),
                "--" => Some(NodeKind::PreDecrement),
                _ => None,
            },
            _ => None,
        };
        if let Some(kind) = prefix {
            self.pos += 1;
            let operand = self.unary()?;
            return Ok(self.builder.interior(kind, vec![operand]));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<NodeId, ParseError> {
        let mut node = self.primary()?;
        loop {
            if self.at_punct(".") {
                match self.peek_at(1) {
                    Some(t) if t.kind == TokenKind::Identifier => {
                        self.pos += 2;
                        let member = self.builder.terminal(NodeKind::Name, &t.lexeme);
                        if self.at_punct("(") {
                            let args = self.argument_list()?;
                            let mut children = vec![node, member];
                            children.extend(args);
                            node = self.builder.interior(NodeKind::MethodCall, children);
                        } else {
                            node = self.builder.interior(NodeKind::FieldAccess, vec![node, member]);
                        }
                        continue;
                    }
                    Some(t) if t.kind == TokenKind::Keyword && t.lexeme == "class" => {
                        self.pos += 2;
                        node = self.builder.interior(NodeKind::ClassLiteral, vec![node]);
                        continue;
                    }
                    _ => return Err(self.error_here("a member name after '.'")),
                }
            }
            if self.at_punct("[") {
                self.pos += 1;
                let index = self.expression()?;
                self.expect_punct("]")?;
                node = self.builder.interior(NodeKind::ArrayAccess, vec![node, index]);
                continue;
            }
            if self.at_operator("++") {
                self.pos += 1;
                node = self.builder.interior(NodeKind::PostIncrement, vec![node]);
                continue;
            }
            if self.at_operator("--") {
                self.pos += 1;
                node = self.builder.interior(NodeKind::PostDecrement, vec![node]);
                continue;
            }
            break;
        }
        Ok(node)
    }

    /// Arguments already parenthesised; returns zero or one `ArgumentList`
    /// node (omitted entirely for empty argument lists).
    fn argument_list(&mut self) -> Result<Vec<NodeId>, ParseError> {
        self.expect_punct("(")?;
        if self.eat_punct(")") {
            return Ok(Vec::new());
        }
        let mut args = vec![self.expression()?];
        while self.eat_punct(",") {
            args.push(self.expression()?);
        }
        self.expect_punct(")")?;
        Ok(vec![self.builder.interior(NodeKind::ArgumentList, args)])
    }

    fn primary(&mut self) -> Result<NodeId, ParseError> {
        let Some(t) = self.peek() else {
            return Err(self.error_here("an expression"));
        };
        match t.kind {
            TokenKind::NumberLiteral => {
                self.pos += 1;
                Ok(self.builder.terminal(NodeKind::NumberLiteral, &t.lexeme))
            }
            TokenKind::StringLiteral => {
                self.pos += 1;
                Ok(self.builder.terminal(NodeKind::StringLiteral, &t.lexeme))
            }
            TokenKind::CharLiteral => {
                self.pos += 1;
                Ok(self.builder.terminal(NodeKind::CharLiteral, &t.lexeme))
            }
            TokenKind::Identifier => {
                self.pos += 1;
                let name = self.builder.terminal(NodeKind::Name, &t.lexeme);
                if self.at_punct("(") {
                    let args = self.argument_list()?;
                    let mut children = vec![name];
                    children.extend(args);
                    return Ok(self.builder.interior(NodeKind::MethodCall, children));
                }
                Ok(name)
            }
            TokenKind::Keyword => match t.lexeme.as_str() {
                "true" | "false" => {
                    self.pos += 1;
                    Ok(self.builder.terminal(NodeKind::BooleanLiteral, &t.lexeme))
                }
                "null" => {
                    self.pos += 1;
                    Ok(self.builder.terminal(NodeKind::NullLiteral, &t.lexeme))
                }
                "this" | "super" => {
                    self.pos += 1;
                    Ok(self.builder.terminal(NodeKind::Name, &t.lexeme))
                }
                "new" => self.creation(),
                kw if PRIMITIVES.contains(&kw) => {
                    // Only valid as `int.class` etc.
                    if self.peek_at(1).is_some_and(|n| n.lexeme == ".")
                        && self.peek_at(2).is_some_and(|n| n.lexeme == "class")
                    {
                        self.pos += 1;
                        Ok(self.builder.terminal(NodeKind::PrimitiveType, kw))
                    } else {
                        Err(self.error_here("an expression"))
                    }
                }
                _ => Err(self.error_here("an expression")),
            },
            TokenKind::Punctuation if t.lexeme == "(" => {
                self.pos += 1;
                let inner = self.expression()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            _ => Err(self.error_here("an expression")),
        }
    }

    fn creation(&mut self) -> Result<NodeId, ParseError> {
        self.pos += 1; // 'new'
        let base = if let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.lexeme.as_str()) {
                self.pos += 1;
                self.builder.terminal(NodeKind::PrimitiveType, &t.lexeme)
            } else {
                self.qualified_type_name()?
            }
        } else {
            return Err(self.error_here("a type after 'new'"));
        };

        if self.at_punct("[") {
            self.pos += 1;
            if self.eat_punct("]") {
                if self.at_punct("[") {
                    return Err(self.error_here("a single-dimensional array creation"));
                }
                let init = self.array_initializer()?;
                return Ok(self.builder.interior(NodeKind::ArrayCreation, vec![base, init]));
            }
            let len = self.expression()?;
            self.expect_punct("]")?;
            if self.at_punct("[") {
                return Err(self.error_here("a single-dimensional array creation"));
            }
            return Ok(self.builder.interior(NodeKind::ArrayCreation, vec![base, len]));
        }

        let args = self.argument_list()?;
        let mut children = vec![base];
        children.extend(args);
        Ok(self.builder.interior(NodeKind::ObjectCreation, children))
    }
}
