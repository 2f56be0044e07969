// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::lexer::{lex, Cursor, Tok, Token};
use super::rules::parse_term_line;
use super::{error, ParseError, ParseErrors, SourceSpan};
use crate::circuit::{Circuit, DataItem, PortKind};
use crate::scenario::EventMap;
use crate::semlog::Term;
use crate::sim::{EnvRound, EnvScript, Policy};

/// One ground term per line; blank lines and `#` comments are skipped.
pub fn parse_events(text: &str) -> Result<Vec<Term>, ParseErrors> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match lex(line, i + 1) {
            Ok(toks) if toks.is_empty() => continue,
            Err(e) => {
                errors.push(e);
                continue;
            }
            Ok(_) => {}
        }
        match parse_term_line(line, i + 1) {
            Ok(t) => out.push(t),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(ParseErrors(errors))
    }
}

/// Parses an environment script:
///
/// ```text
/// policy closed            # or all_ready
/// round 1: offer citizens=ok; ready case1, case2
/// round 2: ready case1
/// ```
///
/// Rounds are numbered 1, 2, ... in order. With a circuit, offered ports
/// must be boundary inputs, ready ports boundary outputs, and tokens must
/// belong to the alphabet.
pub fn parse_env(text: &str, circuit: Option<&Circuit>) -> Result<EnvScript, ParseErrors> {
    let toks = lex(text, 1)?;
    let mut cur = Cursor::new(&toks);
    let mut env = EnvScript::default();
    let mut errors = Vec::new();
    let check_port = |name: &str, span: SourceSpan, want: PortKind, errors: &mut Vec<ParseError>| {
        let Some(c) = circuit else { return };
        if c.port(name).map(|p| p.kind) != Some(want) {
            let dir = if want == PortKind::BoundaryIn { "input" } else { "output" };
            errors.push(error(span, "UNKNOWN_PORT", format!("`{name}` is not a boundary {dir} of `{}`", c.name)));
        }
    };
    let check_data = |item: &str, span: SourceSpan, errors: &mut Vec<ParseError>| {
        let Some(c) = circuit else { return };
        if !c.alphabet.contains(&DataItem::from(item)) {
            errors.push(error(span, "UNKNOWN_DATA", format!("`{item}` is not in the alphabet of `{}`", c.name)));
        }
    };

    while !cur.at_end() {
        if cur.is_keyword("policy") {
            cur.bump();
            let (p, span) = cur.ident("`closed` or `all_ready`")?;
            env.policy = match p {
                "closed" => Policy::Closed,
                "all_ready" => Policy::AllReady,
                other => {
                    return Err(ParseError {
                        span,
                        code: "UNEXPECTED_TOKEN",
                        message: format!("unknown policy `{other}`"),
                        expected: vec!["`closed`".into(), "`all_ready`".into()],
                    }
                    .into())
                }
            };
            cur.eat(&Tok::Semi);
            continue;
        }
        cur.expect_keyword("round")?;
        match cur.bump() {
            Some(Token { tok: Tok::Int(n), span }) => {
                let want = env.rounds.len() + 1;
                if *n as usize != want {
                    errors.push(error(*span, "BAD_ROUND", format!("round {n} out of sequence, expected {want}")));
                }
            }
            _ => {
                cur.back();
                return Err(cur.unexpected(&["round number"]).into());
            }
        }
        cur.expect(Tok::Colon)?;
        let mut round = EnvRound::default();
        if cur.is_keyword("offer") {
            cur.bump();
            loop {
                let (port, pspan) = cur.ident("port name")?;
                cur.expect(Tok::Eq)?;
                let (item, ispan) = cur.ident("data item")?;
                check_port(port, pspan, PortKind::BoundaryIn, &mut errors);
                check_data(item, ispan, &mut errors);
                if round.offers.insert(port.to_owned(), DataItem::from(item)).is_some() {
                    errors.push(error(pspan, "DUPLICATE_OFFER", format!("`{port}` offered twice in one round")));
                }
                let more = cur.eat(&Tok::Semi) || cur.eat(&Tok::Comma);
                if !more || cur.is_keyword("ready") || cur.is_keyword("round") || cur.at_end() {
                    break;
                }
            }
        }
        if cur.is_keyword("ready") {
            cur.bump();
            loop {
                let (port, span) = cur.ident("port name")?;
                check_port(port, span, PortKind::BoundaryOut, &mut errors);
                round.ready.insert(port.to_owned());
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.eat(&Tok::Semi);
        }
        if !(cur.at_end() || cur.is_keyword("round") || cur.is_keyword("policy")) {
            return Err(cur.unexpected(&["`offer`", "`ready`", "`round`"]).into());
        }
        env.rounds.push(round);
    }
    if let Some(c) = circuit {
        env.circuit = c.name.clone();
        env.outputs = c.ports.iter().filter(|p| p.kind == PortKind::BoundaryOut).map(|p| p.name.clone()).collect();
    }
    if errors.is_empty() {
        Ok(env)
    } else {
        Err(ParseErrors(errors))
    }
}

/// Parses `port -> Atom` and `port=data -> Atom` lines.
pub fn parse_map(text: &str, circuit: Option<&Circuit>) -> Result<EventMap, ParseErrors> {
    let toks = lex(text, 1)?;
    let mut cur = Cursor::new(&toks);
    let mut map = EventMap::default();
    let mut errors = Vec::new();
    let mut seen = BTreeSet::new();
    while !cur.at_end() {
        let (port, pspan) = cur.ident("port name")?;
        let data = if cur.eat(&Tok::Eq) {
            let (item, ispan) = cur.ident("data item")?;
            if let Some(c) = circuit {
                if !c.alphabet.contains(&DataItem::from(item)) {
                    errors.push(error(ispan, "UNKNOWN_DATA", format!("`{item}` is not in the alphabet of `{}`", c.name)));
                }
            }
            Some(DataItem::from(item))
        } else {
            None
        };
        cur.expect(Tok::Arrow)?;
        let (atom, _) = cur.ident("atom")?;
        cur.eat(&Tok::Semi);
        if let Some(c) = circuit {
            if c.port(port).is_none() {
                errors.push(error(pspan, "UNKNOWN_PORT", format!("`{port}` is not a boundary port of `{}`", c.name)));
            }
        }
        if !seen.insert((port.to_owned(), data.clone())) {
            errors.push(error(pspan, "DUPLICATE_MAPPING", format!("`{port}` mapped twice for the same data")));
            continue;
        }
        map.insert(port, data, atom);
    }
    if errors.is_empty() {
        Ok(map)
    } else {
        Err(ParseErrors(errors))
    }
}
