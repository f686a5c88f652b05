//! Language-aware scanning of opaque source text.
//!
//! Candidates are never parsed into an AST. Everything downstream (identity
//! hashing, feature extraction) only needs three things from a source file:
//! comments removed, string and char literals kept intact, and a flat token
//! stream. This scanner covers the C-family comment syntax shared by C++ and
//! Rust, plus Rust's nested block comments and lifetimes.

use crate::task::LanguageTag;

/// Remove line and block comments, leaving string and char literals untouched.
///
/// Each removed comment is replaced by a single space so that tokens on either
/// side of it are not glued together.
pub fn strip_comments(source: &str, lang: LanguageTag) -> String {
    let nested_blocks = matches!(lang, LanguageTag::RustRayon);
    let bytes = source.as_bytes();
    let mut out = String::with_capacity(source.len());
    let mut i = 0;
    let mut copied_from = 0;

    while i < bytes.len() {
        match bytes[i] {
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                out.push_str(&source[copied_from..i]);
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                out.push(' ');
                copied_from = i;
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                out.push_str(&source[copied_from..i]);
                i += 2;
                let mut depth = 1usize;
                while i < bytes.len() && depth > 0 {
                    if bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/') {
                        depth -= 1;
                        i += 2;
                    } else if nested_blocks && bytes[i] == b'/' && bytes.get(i + 1) == Some(&b'*') {
                        depth += 1;
                        i += 2;
                    } else {
                        i += 1;
                    }
                }
                out.push(' ');
                copied_from = i;
            }
            b'"' => i = skip_string(bytes, i),
            b'\'' => i = skip_char_literal(bytes, i, lang),
            _ => i += 1,
        }
    }
    out.push_str(&source[copied_from.min(source.len())..]);
    out
}

fn skip_string(bytes: &[u8], start: usize) -> usize {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return i + 1,
            _ => i += 1,
        }
    }
    bytes.len()
}

/// Returns the index just past a char literal, or `start + 1` when the quote
/// opens a Rust lifetime or is otherwise not a literal.
fn skip_char_literal(bytes: &[u8], start: usize, lang: LanguageTag) -> usize {
    let mut i = start + 1;
    if i >= bytes.len() {
        return bytes.len();
    }
    if bytes[i] == b'\\' {
        i += 2;
        while i < bytes.len() && bytes[i] != b'\'' && bytes[i] != b'\n' {
            i += 1;
        }
        return (i + 1).min(bytes.len());
    }
    // One UTF-8 scalar followed by a closing quote.
    let width = utf8_width(bytes[i]);
    if bytes.get(i + width) == Some(&b'\'') {
        return i + width + 1;
    }
    if matches!(lang, LanguageTag::RustRayon) {
        // lifetime or label
        return start + 1;
    }
    // Multi-char C++ literal such as 'ab'; scan to the closing quote on the line.
    while i < bytes.len() && bytes[i] != b'\'' && bytes[i] != b'\n' {
        i += 1;
    }
    (i + 1).min(bytes.len())
}

fn utf8_width(first: u8) -> usize {
    match first {
        0x00..=0x7f => 1,
        0xc0..=0xdf => 2,
        0xe0..=0xef => 3,
        _ => 4,
    }
}

/// Collapse every run of whitespace into one space and trim both ends.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Literal,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
}

const TWO_CHAR_PUNCT: &[&str] = &[
    "&&", "||", "::", "->", "=>", "==", "!=", "<=", ">=", "++", "--", "<<", ">>", "+=", "-=", "*=", "/=", "%=", "&=",
    "|=", "^=", "..",
];

/// Tokenize comment-free source into identifiers, numbers, literals and
/// punctuation. Whitespace is dropped.
pub fn tokenize(source: &str, lang: LanguageTag) -> Vec<Token<'_>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if b == b'_' || b.is_ascii_alphabetic() || b >= 0x80 {
            while i < bytes.len() && (bytes[i] == b'_' || bytes[i].is_ascii_alphanumeric() || bytes[i] >= 0x80) {
                i += 1;
            }
            TokenKind::Ident
        } else if b.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.' || bytes[i] == b'_') {
                // `0..n` is a range, not a float
                if bytes[i] == b'.' && bytes.get(i + 1) == Some(&b'.') {
                    break;
                }
                i += 1;
            }
            TokenKind::Number
        } else if b == b'"' {
            i = skip_string(bytes, i);
            TokenKind::Literal
        } else if b == b'\'' {
            i = skip_char_literal(bytes, i, lang);
            if i == start + 1 {
                TokenKind::Punct
            } else {
                TokenKind::Literal
            }
        } else {
            let rest = &source[i..];
            match TWO_CHAR_PUNCT.iter().find(|p| rest.starts_with(**p)) {
                Some(p) => i += p.len(),
                None => i += 1,
            }
            TokenKind::Punct
        };
        tokens.push(Token {
            kind,
            text: &source[start..i],
        });
    }
    tokens
}
