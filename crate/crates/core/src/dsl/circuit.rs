// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Cursor, Tok};
use super::{error, ParseError, ParseErrors, SourceSpan};
use crate::circuit::{ChannelKind, Circuit, DataItem, PortId, PortKind};

const KINDS: [&str; 7] = ["sync", "lossysync", "fifo1", "syncdrain", "asyncdrain", "filter", "transform"];

/// Parses the circuit DSL:
///
/// ```text
/// circuit name {
///   data { ok, bad }
///   ports { in a; out b; }
///   sync(a, b);
///   fifo1(b, c, init=ok)
/// }
/// ```
///
/// Syntax errors stop at the first problem; semantic errors (duplicate
/// ports, unknown channel kinds, bad parameters) are collected.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseErrors> {
    let toks = lex(text, 1)?;
    let mut p = CircuitParser { cur: Cursor::new(&toks), errors: Vec::new() };
    let circuit = p.circuit()?;
    if p.errors.is_empty() {
        Ok(circuit)
    } else {
        Err(ParseErrors(p.errors))
    }
}

struct CircuitParser<'t> {
    cur: Cursor<'t>,
    errors: Vec<ParseError>,
}

enum Param {
    Init(DataItem),
    Accept(BTreeSet<DataItem>),
    Map(BTreeMap<DataItem, DataItem>),
}

impl CircuitParser<'_> {
    fn circuit(&mut self) -> Result<Circuit, ParseError> {
        self.cur.expect_keyword("circuit")?;
        let (name, _) = self.cur.ident("circuit name")?;
        self.cur.expect(Tok::LBrace)?;
        let mut c = Circuit::new(name, []);

        self.cur.expect_keyword("data")?;
        self.cur.expect(Tok::LBrace)?;
        loop {
            let (item, span) = self.cur.ident("data item")?;
            if !c.alphabet.insert(DataItem::from(item)) {
                self.errors.push(error(span, "DUPLICATE_DATA", format!("data item `{item}` declared twice")));
            }
            if !self.cur.eat(&Tok::Comma) {
                break;
            }
        }
        self.cur.expect(Tok::RBrace)?;

        self.cur.expect_keyword("ports")?;
        self.cur.expect(Tok::LBrace)?;
        let mut declared = BTreeSet::new();
        while !self.cur.is(&Tok::RBrace) {
            let kind = if self.cur.is_keyword("in") {
                PortKind::BoundaryIn
            } else if self.cur.is_keyword("out") {
                PortKind::BoundaryOut
            } else {
                return Err(self.cur.unexpected(&["`in`", "`out`", "`}`"]));
            };
            self.cur.bump();
            let (port, span) = self.cur.ident("port name")?;
            if !self.cur.eat(&Tok::Semi) && !self.cur.is(&Tok::RBrace) {
                return Err(self.cur.unexpected(&["`;`", "`}`"]));
            }
            if !declared.insert(port.to_owned()) {
                self.errors.push(error(span, "DUPLICATE_PORT", format!("port `{port}` declared twice")));
                continue;
            }
            c.ports.insert(PortId { name: port.to_owned(), kind });
        }
        self.cur.expect(Tok::RBrace)?;

        while !self.cur.is(&Tok::RBrace) {
            if self.cur.at_end() {
                return Err(self.cur.unexpected(&["channel", "`}`"]));
            }
            self.channel(&mut c)?;
        }
        self.cur.expect(Tok::RBrace)?;
        if !self.cur.at_end() {
            return Err(self.cur.unexpected(&["end of input"]));
        }
        Ok(c)
    }

    fn channel(&mut self, c: &mut Circuit) -> Result<(), ParseError> {
        let (kw, kw_span) = self.cur.ident("channel kind")?;
        let known = KINDS.contains(&kw);
        if !known {
            self.errors.push(ParseError {
                span: kw_span,
                code: "UNKNOWN_CHANNEL_KIND",
                message: format!("unknown channel kind `{kw}`"),
                expected: KINDS.iter().map(|k| format!("`{k}`")).collect(),
            });
        }
        self.cur.expect(Tok::LParen)?;
        let (a, _) = self.cur.ident("node name")?;
        self.cur.expect(Tok::Comma)?;
        let (b, _) = self.cur.ident("node name")?;
        let mut params: Vec<(Param, SourceSpan, &str)> = Vec::new();
        while self.cur.eat(&Tok::Comma) {
            params.push(self.param()?);
        }
        self.cur.expect(Tok::RParen)?;
        self.cur.eat(&Tok::Semi);
        if !known {
            return Ok(());
        }

        let mut init = None;
        let mut accept = None;
        let mut map = None;
        for (param, span, key) in params {
            let slot_ok = matches!(
                (kw, &param),
                ("fifo1", Param::Init(_)) | ("filter", Param::Accept(_)) | ("transform", Param::Map(_))
            );
            if !slot_ok {
                self.errors.push(error(span, "BAD_PARAMETER", format!("parameter `{key}` does not apply to `{kw}`")));
                continue;
            }
            let dup = match param {
                Param::Init(v) => init.replace(v).is_some(),
                Param::Accept(s) => accept.replace(s).is_some(),
                Param::Map(m) => map.replace(m).is_some(),
            };
            if dup {
                self.errors.push(error(span, "BAD_PARAMETER", format!("parameter `{key}` given twice")));
            }
        }
        let kind = match kw {
            "sync" => ChannelKind::Sync,
            "lossysync" => ChannelKind::LossySync,
            "syncdrain" => ChannelKind::SyncDrain,
            "asyncdrain" => ChannelKind::AsyncDrain,
            "fifo1" => ChannelKind::Fifo1 { init },
            "filter" => match accept {
                Some(accept) => ChannelKind::Filter { accept },
                None => {
                    self.errors.push(error(kw_span, "BAD_PARAMETER", "`filter` needs an `accept` parameter".into()));
                    return Ok(());
                }
            },
            "transform" => match map {
                Some(map) => ChannelKind::Transform { map },
                None => {
                    self.errors.push(error(kw_span, "BAD_PARAMETER", "`transform` needs a `map` parameter".into()));
                    return Ok(());
                }
            },
            _ => unreachable!("checked against KINDS"),
        };
        c.add_channel(kind, a, b);
        Ok(())
    }

    fn param(&mut self) -> Result<(Param, SourceSpan, &'static str), ParseError> {
        let (key, span) = self.cur.ident("`init`, `accept` or `map`")?;
        self.cur.expect(Tok::Eq)?;
        match key {
            "init" => {
                let (v, _) = self.cur.ident("data item")?;
                Ok((Param::Init(v.into()), span, "init"))
            }
            "accept" => {
                self.cur.expect(Tok::LBrace)?;
                let mut set = BTreeSet::new();
                loop {
                    let (v, _) = self.cur.ident("data item")?;
                    set.insert(DataItem::from(v));
                    if !self.cur.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.cur.expect(Tok::RBrace)?;
                Ok((Param::Accept(set), span, "accept"))
            }
            "map" => {
                self.cur.expect(Tok::LBrace)?;
                let mut m = BTreeMap::new();
                loop {
                    let (k, kspan) = self.cur.ident("data item")?;
                    self.cur.expect(Tok::Arrow)?;
                    let (v, _) = self.cur.ident("data item")?;
                    if m.insert(DataItem::from(k), DataItem::from(v)).is_some() {
                        self.errors.push(error(kspan, "BAD_PARAMETER", format!("`{k}` mapped twice")));
                    }
                    if !self.cur.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.cur.expect(Tok::RBrace)?;
                Ok((Param::Map(m), span, "map"))
            }
            other => Err(ParseError {
                span,
                code: "BAD_PARAMETER",
                message: format!("unknown parameter `{other}`"),
                expected: vec!["`init`".into(), "`accept`".into(), "`map`".into()],
            }),
        }
    }
}

/// Prints `c` in the circuit DSL. Ports are sorted; channels keep their order.
pub fn print_circuit(c: &Circuit) -> String {
    let mut out = format!("circuit {} {{\n", c.name);
    let items: Vec<&str> = c.alphabet.iter().map(DataItem::as_str).collect();
    out.push_str(&format!("  data {{ {} }}\n", items.join(", ")));
    out.push_str("  ports {");
    let mut ports: Vec<&PortId> = c.ports.iter().collect();
    ports.sort_by(|x, y| (&x.name, x.kind).cmp(&(&y.name, y.kind)));
    for p in ports {
        let dir = if p.kind == PortKind::BoundaryOut { "out" } else { "in" };
        out.push_str(&format!(" {dir} {};", p.name));
    }
    out.push_str(" }\n");
    for ch in &c.channels {
        match ch.kind.params_text() {
            Some(params) => out.push_str(&format!("  {}({}, {}, {params});\n", ch.kind.keyword(), ch.end_a, ch.end_b)),
            None => out.push_str(&format!("  {}({}, {});\n", ch.kind.keyword(), ch.end_a, ch.end_b)),
        }
    }
    out.push_str("}\n");
    out
}
