// SPDX-License-Identifier: Apache-2.0

//! Parsers and printers for the text formats: circuits, rulebases, event
//! scripts, environment scripts and event maps.
//!
//! All formats share one lexer: identifiers `[A-Za-z_][A-Za-z0-9_]*`,
//! decimal integers, `#` comments to end of line, whitespace-insensitive.

mod circuit;
mod lexer;
mod rules;
mod scripts;

use std::fmt;

use serde::Serialize;

pub use circuit::{parse_circuit, print_circuit};
pub use rules::{parse_rulebase, parse_term, print_rulebase};
pub use scripts::{parse_env, parse_events, parse_map};

/// 1-based position of the offending text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    /// The source text the span covers, if it lies within `text`.
    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        let line = text.lines().nth(self.line.checked_sub(1)?)?;
        let start = self.column.checked_sub(1)?;
        line.get(start..start + self.length)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub code: &'static str,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {} [{}]", self.span.line, self.span.column, self.message, self.code)
    }
}

impl std::error::Error for ParseError {}

/// One or more parse errors, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseErrors(pub Vec<ParseError>);

impl ParseErrors {
    pub fn first(&self) -> &ParseError {
        &self.0[0]
    }

    pub fn codes(&self) -> Vec<&'static str> {
        self.0.iter().map(|e| e.code).collect()
    }
}

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ParseErrors {}

impl From<ParseError> for ParseErrors {
    fn from(e: ParseError) -> Self {
        ParseErrors(vec![e])
    }
}

pub(crate) fn error(span: SourceSpan, code: &'static str, message: String) -> ParseError {
    ParseError { span, code, message, expected: Vec::new() }
}
