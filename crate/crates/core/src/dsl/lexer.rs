// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u32),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Eq,
    /// `->`
    Arrow,
    /// `=>`
    Implies,
    /// `>>`
    Then,
    Gt,
    Plus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return f.write_str(s),
            Tok::Int(n) => return write!(f, "{n}"),
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::Arrow => "->",
            Tok::Implies => "=>",
            Tok::Then => ">>",
            Tok::Gt => ">",
            Tok::Plus => "+",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits `text` into tokens. `first_line` offsets line numbers so that
/// line-oriented formats can lex one line at a time.
pub fn lex(text: &str, first_line: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = first_line;
    let mut col = 1;
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let start = SourceSpan { line, column: col, length: 1 };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                col += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    end = j + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &text[i..end];
            out.push(Token { tok: Tok::Ident(word.to_owned()), span: SourceSpan { length: word.len(), ..start } });
            col += word.len();
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    end = j + 1;
                    chars.next();
                } else {
                    break;
                }
            }
            let digits = &text[i..end];
            let span = SourceSpan { length: digits.len(), ..start };
            let n = digits.parse::<u32>().map_err(|_| ParseError {
                span,
                code: "LEX_BAD_INTEGER",
                message: format!("integer `{digits}` is out of range"),
                expected: Vec::new(),
            })?;
            out.push(Token { tok: Tok::Int(n), span });
            col += digits.len();
            continue;
        }
        chars.next();
        let next = chars.peek().map(|&(_, c)| c);
        let (tok, len) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('=', Some('>')) => (Tok::Implies, 2),
            ('>', Some('>')) => (Tok::Then, 2),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('=', _) => (Tok::Eq, 1),
            ('>', _) => (Tok::Gt, 1),
            ('+', _) => (Tok::Plus, 1),
            _ => {
                return Err(ParseError {
                    span: start,
                    code: "LEX_UNKNOWN_CHAR",
                    message: format!("unknown character `{c}`"),
                    expected: Vec::new(),
                })
            }
        };
        if len == 2 {
            chars.next();
        }
        out.push(Token { tok, span: SourceSpan { length: len, ..start } });
        col += len;
    }
    Ok(out)
}

/// Cursor over a token stream with the usual expect/peek helpers.
#[derive(Clone)]
pub struct Cursor<'t> {
    toks: &'t [Token],
    pos: usize,
}

impl<'t> Cursor<'t> {
    pub fn new(toks: &'t [Token]) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    pub fn peek_at(&self, offset: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + offset)
    }

    /// Number of tokens consumed.
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn back(&mut self) {
        self.pos = self.pos.saturating_sub(1);
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn bump(&mut self) -> Option<&'t Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    pub fn is(&self, tok: &Tok) -> bool {
        self.peek().is_some_and(|t| &t.tok == tok)
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == kw)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.is(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Error for the current position: an unexpected token, or end of input.
    pub fn unexpected(&self, expected: &[&str]) -> ParseError {
        let expected: Vec<String> = expected.iter().map(|s| (*s).to_owned()).collect();
        let wanted = if expected.is_empty() { String::new() } else { format!(", expected {}", expected.join(" or ")) };
        match self.peek() {
            Some(t) => ParseError {
                span: t.span,
                code: "UNEXPECTED_TOKEN",
                message: format!("unexpected `{}`{wanted}", t.tok),
                expected,
            },
            None => match self.toks.last() {
                Some(last) => ParseError {
                    span: last.span,
                    code: "UNEXPECTED_EOF",
                    message: format!("unexpected end of input after `{}`{wanted}", last.tok),
                    expected,
                },
                None => ParseError {
                    span: SourceSpan { line: 1, column: 1, length: 1 },
                    code: "UNEXPECTED_EOF",
                    message: format!("empty input{wanted}"),
                    expected,
                },
            },
        }
    }

    pub fn expect(&mut self, tok: Tok) -> Result<&'t Token, ParseError> {
        if self.is(&tok) {
            Ok(self.bump().expect("peeked"))
        } else {
            Err(self.unexpected(&[&format!("`{tok}`")]))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<&'t Token, ParseError> {
        if self.is_keyword(kw) {
            Ok(self.bump().expect("peeked"))
        } else {
            Err(self.unexpected(&[&format!("`{kw}`")]))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<(&'t str, SourceSpan), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), span }) => {
                self.pos += 1;
                Ok((s.as_str(), *span))
            }
            _ => Err(self.unexpected(&[what])),
        }
    }
}
