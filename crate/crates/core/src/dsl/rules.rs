// SPDX-License-Identifier: Apache-2.0

use super::lexer::{lex, Cursor, Tok, Token};
use super::{error, ParseError, ParseErrors};
use crate::semlog::{
    classify, BuiltinKind, CountExpr, Guard, Modality, Pattern, ProtocolOrder, RuleBase, RuleItem, StandingFact, Term,
};

/// Parses a rulebase:
///
/// ```text
/// protocol { AmbulanceRequest >> FireRequest >> PoliceRequest }
/// fact r6: Forbidden((Very)BudgetConsuming)
/// rule r8: Forbidden(A) AND A => Failure(A)
/// rule r12: (I)A AND I>2 => P((Very)A)
/// ```
///
/// Inside rules, identifiers made of one uppercase letter and optional
/// digits are variables. Guards follow `AND` or `WHERE`.
pub fn parse_rulebase(text: &str) -> Result<RuleBase, ParseErrors> {
    let toks = lex(text, 1)?;
    let mut p = TermParser { cur: Cursor::new(&toks), rule_vars: false };
    let mut base = RuleBase::default();
    let mut errors = Vec::new();
    while !p.cur.at_end() {
        if p.cur.is_keyword("protocol") {
            p.cur.bump();
            let name = match p.cur.peek() {
                Some(Token { tok: Tok::Ident(n), .. }) => {
                    p.cur.bump();
                    p.cur.eat(&Tok::Colon);
                    n.clone()
                }
                _ => format!("protocol{}", base.orders.len() + 1),
            };
            p.cur.expect(Tok::LBrace)?;
            let mut atoms = vec![p.cur.ident("atom")?.0.to_owned()];
            while p.cur.eat(&Tok::Then) {
                atoms.push(p.cur.ident("atom")?.0.to_owned());
            }
            let close = p.cur.expect(Tok::RBrace)?;
            if atoms.len() < 2 {
                errors.push(error(close.span, "BAD_PROTOCOL", "a protocol order needs `>>` between at least two atoms before `}`".into()));
            }
            base.orders.push(ProtocolOrder { name, atoms });
        } else if p.cur.is_keyword("fact") {
            p.cur.bump();
            let name = if matches!(p.cur.peek_at(1), Some(Token { tok: Tok::Colon, .. })) {
                let (n, _) = p.cur.ident("fact name")?;
                p.cur.bump();
                n.to_owned()
            } else {
                format!("fact{}", base.facts.len() + 1)
            };
            p.rule_vars = false;
            let term = p.ground()?;
            base.facts.push(StandingFact { name, term });
        } else if p.cur.is_keyword("rule") {
            p.cur.bump();
            let (name, name_span) = p.cur.ident("rule name")?;
            p.cur.expect(Tok::Colon)?;
            p.rule_vars = true;
            let mut premises = vec![p.pattern()?];
            let mut guards = Vec::new();
            loop {
                if p.cur.is_keyword("AND") || p.cur.is_keyword("WHERE") {
                    let where_kw = p.cur.is_keyword("WHERE");
                    p.cur.bump();
                    if where_kw || p.at_guard() {
                        guards.push(p.guard(&mut errors)?);
                    } else if guards.is_empty() {
                        premises.push(p.pattern()?);
                    } else {
                        return Err(p.cur.unexpected(&["guard"]).into());
                    }
                } else {
                    break;
                }
            }
            p.cur.expect(Tok::Implies)?;
            let start = p.pos();
            let conclusion = p.pattern()?;
            let end = p.pos();
            match classify(name, premises, guards, conclusion) {
                Ok(RuleItem::Rule(r)) => base.rules.push(r),
                Ok(RuleItem::Builtin(b)) => base.builtins.push(b),
                Err(rej) => {
                    let span = match rej.code {
                        "UNBOUND_VAR" => toks[start..end]
                            .iter()
                            .find(|t| matches!(&t.tok, Tok::Ident(s) if rej.message.contains(&format!("`{s}`"))))
                            .map_or(name_span, |t| t.span),
                        _ => name_span,
                    };
                    let message = if rej.message.contains(&format!("`{name}`")) || span != name_span {
                        rej.message
                    } else {
                        format!("rule `{name}`: {}", rej.message)
                    };
                    errors.push(error(span, rej.code, message));
                }
            }
        } else {
            return Err(p.cur.unexpected(&["`protocol`", "`fact`", "`rule`"]).into());
        }
        p.cur.eat(&Tok::Semi);
    }
    if errors.is_empty() {
        Ok(base)
    } else {
        errors.sort_by_key(|e| e.span);
        Err(ParseErrors(errors))
    }
}

/// Parses one ground term such as `Warning(P((Very)BudgetConsuming))`.
pub fn parse_term(text: &str) -> Result<Term, ParseErrors> {
    parse_term_line(text, 1).map_err(ParseErrors::from)
}

pub(crate) fn parse_term_line(text: &str, line: usize) -> Result<Term, ParseError> {
    let toks = lex(text, line)?;
    let mut p = TermParser { cur: Cursor::new(&toks), rule_vars: false };
    let t = p.ground()?;
    if !p.cur.at_end() {
        return Err(p.cur.unexpected(&["end of term"]));
    }
    Ok(t)
}

/// Prints a rulebase in the form `parse_rulebase` reads.
pub fn print_rulebase(base: &RuleBase) -> String {
    let mut out = String::new();
    for o in &base.orders {
        out.push_str(&format!("protocol {} {{ {} }}\n", o.name, o.atoms.join(" >> ")));
    }
    for f in &base.facts {
        out.push_str(&format!("fact {}: {}\n", f.name, f.term));
    }
    for r in &base.rules {
        out.push_str(&format!("{r}\n"));
    }
    for b in &base.builtins {
        let body = match b.kind {
            BuiltinKind::CountFirst => "A => (1)A",
            BuiltinKind::CountNext => "A AND (I)A => (I+1)A",
        };
        out.push_str(&format!("rule {}: {body}\n", b.name));
    }
    out
}

fn is_var(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_digit())
}

struct TermParser<'t> {
    cur: Cursor<'t>,
    rule_vars: bool,
}

impl TermParser<'_> {
    fn pos(&self) -> usize {
        self.cur.position()
    }

    fn at_guard(&self) -> bool {
        matches!(
            (self.cur.peek(), self.cur.peek_at(1)),
            (Some(Token { tok: Tok::Ident(v), .. }), Some(Token { tok: Tok::Gt, .. })) if is_var(v)
        )
    }

    fn guard(&mut self, errors: &mut Vec<ParseError>) -> Result<Guard, ParseError> {
        let (v, span) = self.cur.ident("count variable")?;
        if !is_var(v) {
            errors.push(error(span, "BAD_GUARD", format!("guard on `{v}`, which is not a variable")));
        }
        self.cur.expect(Tok::Gt)?;
        match self.cur.bump() {
            Some(Token { tok: Tok::Int(n), .. }) => Ok(Guard { var: v.to_owned(), above: *n }),
            _ => {
                self.cur.back();
                Err(self.cur.unexpected(&["integer"]))
            }
        }
    }

    fn ground(&mut self) -> Result<Term, ParseError> {
        let p = self.pattern()?;
        Ok(p.instantiate(&Default::default()).expect("no variables outside rules"))
    }

    fn term_start(&self) -> bool {
        match self.cur.peek() {
            Some(Token { tok: Tok::Ident(s), .. }) => s != "AND" && s != "WHERE",
            Some(Token { tok: Tok::LParen, .. }) => true,
            _ => false,
        }
    }

    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        if !self.term_start() {
            return Err(self.cur.unexpected(&["term"]));
        }
        if self.cur.eat(&Tok::LParen) {
            return self.paren();
        }
        let (name, span) = self.cur.ident("term")?;
        if self.cur.eat(&Tok::LParen) {
            let Some(m) = Modality::from_name(name) else {
                return Err(error(span, "UNKNOWN_OPERATOR", format!("unknown operator `{name}`")));
            };
            let inner = self.pattern()?;
            self.cur.expect(Tok::RParen)?;
            return Ok(Pattern::Op(m, Box::new(inner)));
        }
        if self.rule_vars && is_var(name) {
            Ok(Pattern::Var(name.to_owned()))
        } else {
            Ok(Pattern::Atom(name.to_owned()))
        }
    }

    /// After `(`: a prefix form `(Very)t`, `(3)t`, `(I)t`, `(I+1)t`, an
    /// implication `(a=>b)`, or a parenthesised term.
    fn paren(&mut self) -> Result<Pattern, ParseError> {
        let prefix = |offset: usize| {
            matches!(self.cur.peek_at(offset), Some(Token { tok: Tok::RParen, .. })) && {
                let mut probe = TermParser { cur: self.cur.clone(), rule_vars: self.rule_vars };
                for _ in 0..=offset {
                    probe.cur.bump();
                }
                probe.term_start()
            }
        };
        match self.cur.peek().map(|t| (&t.tok, t.span)) {
            Some((Tok::Int(n), span)) if prefix(1) => {
                let n = *n;
                self.cur.bump();
                self.cur.bump();
                if n == 0 {
                    return Err(error(span, "BAD_COUNT", format!("count `{n}` must be at least 1")));
                }
                let inner = self.pattern()?;
                return Ok(Pattern::Count(CountExpr::Lit(n), Box::new(inner)));
            }
            Some((Tok::Ident(s), span)) if prefix(1) => {
                self.cur.bump();
                self.cur.bump();
                let expr = if s == "Very" {
                    let inner = self.pattern()?;
                    return Ok(Pattern::Op(Modality::Very, Box::new(inner)));
                } else if self.rule_vars && is_var(s) {
                    CountExpr::Var(s.clone())
                } else {
                    return Err(error(span, "UNKNOWN_OPERATOR", format!("unknown prefix operator `{s}`")));
                };
                let inner = self.pattern()?;
                return Ok(Pattern::Count(expr, Box::new(inner)));
            }
            Some((Tok::Ident(s), span))
                if matches!(self.cur.peek_at(1), Some(Token { tok: Tok::Plus, .. })) =>
            {
                let s = s.clone();
                self.cur.bump();
                self.cur.bump();
                let k = match self.cur.bump() {
                    Some(Token { tok: Tok::Int(k), .. }) => *k,
                    _ => {
                        self.cur.back();
                        return Err(self.cur.unexpected(&["integer"]));
                    }
                };
                self.cur.expect(Tok::RParen)?;
                if !(self.rule_vars && is_var(&s)) {
                    return Err(error(span, "BAD_COUNT", format!("`{s}+{k}` needs a count variable")));
                }
                let inner = self.pattern()?;
                return Ok(Pattern::Count(CountExpr::Succ(s, k), Box::new(inner)));
            }
            _ => {}
        }
        let first = self.pattern()?;
        let out = if self.cur.eat(&Tok::Implies) {
            let second = self.pattern()?;
            Pattern::Implies(Box::new(first), Box::new(second))
        } else {
            first
        };
        self.cur.expect(Tok::RParen)?;
        Ok(out)
    }
}
