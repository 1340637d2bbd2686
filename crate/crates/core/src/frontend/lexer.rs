//! Tokenizer for the supported Java subset.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Identifier,
    NumberLiteral,
    StringLiteral,
    CharLiteral,
    /// `@` fused with the following identifier, e.g. `@Test`.
    Annotation,
    Operator,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Exact source slice; string/char lexemes keep their quotes.
    pub lexeme: String,
    /// Byte offset of the first character in the input.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lex error at byte {offset}: {message}")]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while",
    // Literal words are lexed as keywords; the parser turns them into
    // literal terminals.
    "true", "false", "null",
];

/// Multi-character operators, longest first so greedy matching is correct.
const OPERATORS: &[&str] = &[
    ">>>=", ">>>", "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "<<", ">>", "->", "=", "<", ">", "+", "-", "*", "/", "%", "!",
    "?", ":", "&", "|", "^", "~",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

/// Split `text` into tokens, skipping whitespace and `//`/`/* */` comments.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;

    while pos < bytes.len() {
        let rest = &text[pos..];
        let c = rest.chars().next().expect("pos is on a char boundary");

        if c.is_whitespace() {
            pos += c.len_utf8();
            continue;
        }
        if rest.starts_with("//") {
            pos += rest.find('\n').map_or(rest.len(), |i| i + 1);
            continue;
        }
        if rest.starts_with("/*") {
            match rest[2..].find("*/") {
                Some(i) => pos += 2 + i + 2,
                None => {
                    return Err(LexError { offset: pos, message: "unterminated block comment".into() })
                }
            }
            continue;
        }

        if is_ident_start(c) {
            let end = rest.find(|ch| !is_ident_part(ch)).unwrap_or(rest.len());
            let word = &rest[..end];
            let kind = if is_keyword(word) { TokenKind::Keyword } else { TokenKind::Identifier };
            tokens.push(Token { kind, lexeme: word.to_string(), offset: pos });
            pos += end;
            continue;
        }

        if c.is_ascii_digit() {
            let (len, lexeme) = lex_number(rest);
            tokens.push(Token { kind: TokenKind::NumberLiteral, lexeme, offset: pos });
            pos += len;
            continue;
        }

        if c == '"' {
            let len = lex_quoted(rest, '"').ok_or_else(|| LexError {
                offset: pos,
                message: "unterminated string literal".into(),
            })?;
            tokens.push(Token {
                kind: TokenKind::StringLiteral,
                lexeme: rest[..len].to_string(),
                offset: pos,
            });
            pos += len;
            continue;
        }

        if c == '\'' {
            let len = lex_quoted(rest, '\'').ok_or_else(|| LexError {
                offset: pos,
                message: "unterminated char literal".into(),
            })?;
            tokens.push(Token {
                kind: TokenKind::CharLiteral,
                lexeme: rest[..len].to_string(),
                offset: pos,
            });
            pos += len;
            continue;
        }

        if c == '@' {
            let after = &rest[1..];
            let end = after.find(|ch| !is_ident_part(ch)).unwrap_or(after.len());
            if end == 0 || !after.starts_with(is_ident_start) {
                return Err(LexError {
                    offset: pos,
                    message: "expected annotation name after '@'".into(),
                });
            }
            tokens.push(Token {
                kind: TokenKind::Annotation,
                lexeme: rest[..1 + end].to_string(),
                offset: pos,
            });
            pos += 1 + end;
            continue;
        }

        if "(){}[];,.".contains(c) {
            tokens.push(Token {
                kind: TokenKind::Punctuation,
                lexeme: c.to_string(),
                offset: pos,
            });
            pos += 1;
            continue;
        }

        if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            tokens.push(Token {
                kind: TokenKind::Operator,
                lexeme: (*op).to_string(),
                offset: pos,
            });
            pos += op.len();
            continue;
        }

        return Err(LexError { offset: pos, message: format!("unexpected character {c:?}") });
    }

    Ok(tokens)
}

/// Length and lexeme of a number starting at the head of `rest`.
fn lex_number(rest: &str) -> (usize, String) {
    let bytes = rest.as_bytes();
    let mut i = 0;

    if rest.starts_with("0x") || rest.starts_with("0X") {
        i = 2;
        while i < bytes.len() && (bytes[i].is_ascii_hexdigit() || bytes[i] == b'_') {
            i += 1;
        }
    } else {
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
            i += 1;
        }
        // Fraction: only when a digit follows the dot, so `1.max(2)` keeps
        // the dot as punctuation.
        if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
            }
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                i = j;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
    }

    if i < bytes.len() && matches!(bytes[i], b'l' | b'L' | b'f' | b'F' | b'd' | b'D') {
        i += 1;
    }
    (i, rest[..i].to_string())
}

/// Byte length of a quoted literal including both quotes, or `None` if it
/// never closes. Handles `\x` escapes opaquely.
fn lex_quoted(rest: &str, quote: char) -> Option<usize> {
    let mut chars = rest.char_indices().skip(1);
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => {
                chars.next()?;
            }
            '\n' => return None,
            c if c == quote => return Some(i + c.len_utf8()),
            _ => {}
        }
    }
    None
}
