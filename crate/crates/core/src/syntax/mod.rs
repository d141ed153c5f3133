//! Lexing, parsing and pretty-printing of SPARC programs and queries.

pub mod ast;
mod format;
mod lexer;
mod parser;

use std::fmt;

pub use ast::*;
pub use format::{format_literal, format_program, format_rule, format_sort_expr, format_term};
pub use parser::{parse_program, parse_query};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
    /// Token kinds that would have been accepted at `pos`.
    pub expected: Vec<String>,
    /// The offending lexeme (empty at end of input).
    pub found: String,
}

impl SyntaxError {
    pub(crate) fn new(pos: Pos, message: impl Into<String>, found: &str) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
            expected: Vec::new(),
            found: found.to_string(),
        }
    }

    pub(crate) fn expecting(mut self, expected: &[&str]) -> Self {
        self.expected = expected.iter().map(|s| s.to_string()).collect();
        self
    }
}

impl SyntaxError {
    /// The message without the position.
    pub fn describe(&self) -> String {
        let mut out = self.message.clone();
        if !self.expected.is_empty() {
            out.push_str(&format!("; expected {}", self.expected.join(" or ")));
        }
        if self.found.is_empty() {
            out.push_str(", found end of input");
        } else {
            out.push_str(&format!(", found `{}`", self.found));
        }
        out
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.describe())
    }
}
