// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use super::term::{CountExpr, Modality, Pattern, Term};

/// `I > k` on a bound count variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub var: String,
    pub above: u32,
}

impl Guard {
    pub fn holds(&self, value: u32) -> bool {
        value > self.above
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleClass {
    /// Ground atom premise: each occurrence of the premise yields one
    /// occurrence (or standing fact) of the conclusion.
    EventImplication,
    /// Pattern rule applied during saturation.
    FactRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub premises: Vec<Pattern>,
    pub guards: Vec<Guard>,
    pub conclusion: Pattern,
    pub class: RuleClass,
}

impl Rule {
    /// For event implications: the ground premise and conclusion.
    pub fn implication(&self) -> Option<(Term, Term)> {
        if self.class != RuleClass::EventImplication {
            return None;
        }
        let empty = Default::default();
        Some((self.premises[0].instantiate(&empty)?, self.conclusion.instantiate(&empty)?))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.premises.iter().map(ToString::to_string).collect();
        parts.extend(self.guards.iter().map(|g| format!("{}>{}", g.var, g.above)));
        write!(f, "rule {}: {} => {}", self.name, parts.join(" AND "), self.conclusion)
    }
}

/// The two counting rules the engine implements over event occurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinKind {
    /// `A => (1)A`
    CountFirst,
    /// `A AND (I)A => (I+1)A`
    CountNext,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltinRule {
    pub name: String,
    pub kind: BuiltinKind,
}

/// `a1 >> a2 >> ... >> an`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolOrder {
    pub name: String,
    pub atoms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandingFact {
    pub name: String,
    pub term: Term,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleBase {
    pub orders: Vec<ProtocolOrder>,
    pub facts: Vec<StandingFact>,
    pub rules: Vec<Rule>,
    pub builtins: Vec<BuiltinRule>,
}

impl RuleBase {
    /// Declarations written in the source, built-in acknowledgements excluded.
    pub fn explicit_count(&self) -> usize {
        self.orders.len() + self.facts.len() + self.rules.len()
    }

    pub fn total_count(&self) -> usize {
        self.explicit_count() + self.builtins.len()
    }

    pub fn event_implications(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.class == RuleClass::EventImplication)
    }

    pub fn fact_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.class == RuleClass::FactRule)
    }

    pub fn builtin_name(&self, kind: BuiltinKind) -> String {
        self.builtins.iter().find(|b| b.kind == kind).map(|b| b.name.clone()).unwrap_or_else(|| match kind {
            BuiltinKind::CountFirst => "count-first".to_owned(),
            BuiltinKind::CountNext => "count-next".to_owned(),
        })
    }
}

/// Result of classifying a parsed rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleItem {
    Rule(Rule),
    Builtin(BuiltinRule),
}

/// Rejection reason with a stable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleRejection {
    pub code: &'static str,
    pub message: String,
}

/// Checks variable binding and sorts the rule into its class. The two
/// counting forms are recognised and turned into built-in acknowledgements.
pub fn classify(
    name: &str,
    premises: Vec<Pattern>,
    guards: Vec<Guard>,
    conclusion: Pattern,
) -> Result<RuleItem, RuleRejection> {
    if let Some(kind) = builtin_form(&premises, &guards, &conclusion) {
        return Ok(RuleItem::Builtin(BuiltinRule { name: name.to_owned(), kind }));
    }
    if matches!(conclusion, Pattern::Count(..)) {
        return Err(RuleRejection {
            code: "RESERVED_COUNT",
            message: format!("rule `{name}` concludes a count; counts are maintained by the engine"),
        });
    }
    let mut bound_terms = Vec::new();
    let mut bound_counts = Vec::new();
    for p in &premises {
        p.term_vars(&mut bound_terms);
        p.count_vars(&mut bound_counts);
        if has_succ(p) {
            return Err(RuleRejection {
                code: "BAD_COUNT",
                message: format!("`I+k` counts may only appear in the built-in counting rule, not in `{p}`"),
            });
        }
    }
    if has_succ(&conclusion) {
        return Err(RuleRejection {
            code: "BAD_COUNT",
            message: format!("`I+k` counts may only appear in the built-in counting rule, not in `{conclusion}`"),
        });
    }
    let (mut need_terms, mut need_counts) = (Vec::new(), Vec::new());
    conclusion.term_vars(&mut need_terms);
    conclusion.count_vars(&mut need_counts);
    need_counts.extend(guards.iter().map(|g| g.var.clone()));
    if let Some(v) = need_terms.iter().find(|v| !bound_terms.contains(v)) {
        return Err(RuleRejection { code: "UNBOUND_VAR", message: format!("variable `{v}` in rule `{name}` is not bound by a premise") });
    }
    if let Some(v) = need_counts.iter().find(|v| !bound_counts.contains(v)) {
        return Err(RuleRejection {
            code: "UNBOUND_VAR",
            message: format!("count variable `{v}` in rule `{name}` is not bound by a premise"),
        });
    }

    let class = match (&premises[..], guards.is_empty()) {
        ([Pattern::Atom(_)], true) if conclusion.is_ground() && !is_diagnostic(&conclusion) => RuleClass::EventImplication,
        _ => RuleClass::FactRule,
    };
    Ok(RuleItem::Rule(Rule { name: name.to_owned(), premises, guards, conclusion, class }))
}

fn is_diagnostic(p: &Pattern) -> bool {
    matches!(p, Pattern::Op(m, _) if m.is_diagnostic())
}

fn has_succ(p: &Pattern) -> bool {
    match p {
        Pattern::Count(CountExpr::Succ(..), _) => true,
        Pattern::Count(_, q) | Pattern::Op(_, q) => has_succ(q),
        Pattern::Implies(a, b) => has_succ(a) || has_succ(b),
        Pattern::Var(_) | Pattern::Atom(_) => false,
    }
}

fn builtin_form(premises: &[Pattern], guards: &[Guard], conclusion: &Pattern) -> Option<BuiltinKind> {
    if !guards.is_empty() {
        return None;
    }
    let Pattern::Count(expr, inner) = conclusion else { return None };
    let Pattern::Var(a) = inner.as_ref() else { return None };
    match (premises, expr) {
        ([Pattern::Var(x)], CountExpr::Lit(1)) if x == a => Some(BuiltinKind::CountFirst),
        ([p, q], CountExpr::Succ(i, 1)) => {
            let is_occ = |p: &Pattern| matches!(p, Pattern::Var(x) if x == a);
            let is_count = |p: &Pattern| {
                matches!(p, Pattern::Count(CountExpr::Var(j), x) if j == i && matches!(x.as_ref(), Pattern::Var(y) if y == a))
            };
            ((is_occ(p) && is_count(q)) || (is_count(p) && is_occ(q))).then_some(BuiltinKind::CountNext)
        }
        _ => None,
    }
}

/// True for modality names reserved by the logic.
pub fn is_operator(name: &str) -> bool {
    Modality::from_name(name).is_some()
}
