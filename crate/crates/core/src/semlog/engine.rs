// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use super::rules::{BuiltinKind, ProtocolOrder, Rule, RuleBase};
use super::term::{Bindings, Modality, Pattern, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventOrigin {
    Script,
    TraceMapped,
    DerivedEvent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// 1-based, strictly increasing within an engine.
    pub index: usize,
    pub term: Term,
    pub origin: EventOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub max_depth: usize,
    /// Upper bound on saturation passes.
    pub max_iterations: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_depth: 8, max_iterations: 10_000 }
    }
}

/// How a fact first entered the fact set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Event { index: usize, origin: EventOrigin },
    Standing { name: String },
    /// `(a=>b)` reified from an event-implication rule.
    Reified { rule: String },
    Rule { rule: String, premises: Vec<Term> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub fact: Term,
    pub justification: Justification,
    /// 0 for events and standing facts, else 1 + deepest premise.
    pub depth: usize,
}

impl Derivation {
    pub fn rule(&self) -> Option<&str> {
        match &self.justification {
            Justification::Rule { rule, .. } | Justification::Reified { rule } => Some(rule),
            Justification::Standing { name } => Some(name),
            Justification::Event { .. } => None,
        }
    }

    pub fn premises(&self) -> &[Term] {
        match &self.justification {
            Justification::Rule { premises, .. } => premises,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaturationOutcome {
    pub converged: bool,
    pub passes: usize,
    pub added: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderViolation {
    pub order: String,
    pub index: usize,
    pub atom: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictItem {
    pub fact: Term,
    pub derivation: Derivation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub failures: Vec<VerdictItem>,
    pub warnings: Vec<VerdictItem>,
    pub resolved: Vec<VerdictItem>,
    pub order_violations: Vec<OrderViolation>,
    pub facts_total: usize,
    pub converged: bool,
}

impl Verdict {
    pub fn has_findings(&self) -> bool {
        !(self.failures.is_empty() && self.warnings.is_empty() && self.order_violations.is_empty())
    }

    pub fn to_json(&self) -> Value {
        let items = |v: &[VerdictItem]| -> Vec<Value> {
            v.iter()
                .map(|i| {
                    json!({
                        "fact": i.fact.to_string(),
                        "rule": i.derivation.rule(),
                        "premises": i.derivation.premises().iter().map(ToString::to_string).collect::<Vec<_>>(),
                    })
                })
                .collect()
        };
        json!({
            "failures": items(&self.failures),
            "warnings": items(&self.warnings),
            "resolved": items(&self.resolved),
            "order_violations": self.order_violations,
            "facts_total": self.facts_total,
            "converged": self.converged,
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "facts: {}", self.facts_total)?;
        for (label, items) in [("failure", &self.failures), ("warning", &self.warnings), ("resolved", &self.resolved)] {
            for i in items {
                writeln!(f, "{label}: {}", i.fact)?;
            }
        }
        for v in &self.order_violations {
            writeln!(f, "order violation: event {} `{}`, expected one of {{{}}}", v.index, v.atom, v.expected.join(", "))?;
        }
        if !self.converged {
            writeln!(f, "saturation did not converge")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownFact(pub Term);

impl fmt::Display for UnknownFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` is not a known fact", self.0)
    }
}

impl std::error::Error for UnknownFact {}

/// Node of an explanation tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplainNode {
    pub fact: Term,
    pub origin: String,
    pub children: Vec<ExplainNode>,
}

impl ExplainNode {
    /// Rule names used anywhere in the tree, deduplicated in visit order.
    pub fn rules(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_rules(&mut out);
        out
    }

    fn collect_rules(&self, out: &mut Vec<String>) {
        if let Some(rule) = self.origin.strip_prefix("rule ") {
            if !out.iter().any(|r| r == rule) {
                out.push(rule.to_owned());
            }
        }
        for c in &self.children {
            c.collect_rules(out);
        }
    }

    fn render(&self, indent: usize, out: &mut String) {
        out.push_str(&format!("{}{}  [{}]\n", "  ".repeat(indent), self.fact, self.origin));
        for c in &self.children {
            c.render(indent + 1, out);
        }
    }
}

impl fmt::Display for ExplainNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(0, &mut s);
        f.write_str(&s)
    }
}

/// Fact store with occurrence counting, event implications and saturation.
#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    rules: RuleBase,
    implications: Vec<(String, Term, Term)>,
    facts: BTreeSet<Term>,
    derivations: BTreeMap<Term, Derivation>,
    events: Vec<Event>,
    counts: BTreeMap<Term, u32>,
    diagnostics: Vec<Diagnostic>,
    converged: bool,
}

impl Engine {
    pub fn new(rules: RuleBase, config: EngineConfig) -> Engine {
        let implications: Vec<(String, Term, Term)> =
            rules.event_implications().filter_map(|r| r.implication().map(|(p, c)| (r.name.clone(), p, c))).collect();
        let mut e = Engine {
            config,
            rules,
            implications,
            facts: BTreeSet::new(),
            derivations: BTreeMap::new(),
            events: Vec::new(),
            counts: BTreeMap::new(),
            diagnostics: Vec::new(),
            converged: true,
        };
        for f in e.rules.facts.clone() {
            e.add_checked(f.term, Justification::Standing { name: f.name }, 0);
        }
        for (rule, p, c) in e.implications.clone() {
            e.add_checked(Term::implies(p, c), Justification::Reified { rule }, 0);
        }
        e
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    /// Facts in canonical order.
    pub fn facts(&self) -> &BTreeSet<Term> {
        &self.facts
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.facts.contains(t)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn derivation(&self, t: &Term) -> Option<&Derivation> {
        self.derivations.get(t)
    }

    /// Occurrences of `t` seen so far.
    pub fn occurrences(&self, t: &Term) -> u32 {
        self.counts.get(t).copied().unwrap_or(0)
    }

    /// Adds one occurrence of `term` and everything it implies directly.
    /// Returns the facts that were new.
    pub fn ingest(&mut self, term: Term, origin: EventOrigin) -> Vec<Term> {
        let before = self.facts.clone();
        self.ingest_inner(term, origin, None, &mut Vec::new());
        self.facts.difference(&before).cloned().collect()
    }

    pub fn ingest_all(&mut self, terms: impl IntoIterator<Item = Term>, origin: EventOrigin) {
        for t in terms {
            self.ingest(t, origin);
        }
    }

    fn ingest_inner(&mut self, term: Term, origin: EventOrigin, cause: Option<(String, Term)>, stack: &mut Vec<Term>) {
        if term.depth() > self.config.max_depth {
            self.depth_limit(&term);
            return;
        }
        let index = self.events.len() + 1;
        self.events.push(Event { index, term: term.clone(), origin });
        let just = match cause {
            Some((rule, premise)) => Justification::Rule { rule, premises: vec![premise] },
            None => Justification::Event { index, origin },
        };
        let depth = usize::from(matches!(just, Justification::Rule { .. }));
        self.add(term.clone(), just, depth);

        if term.is_occurrence() {
            let n = self.counts.entry(term.clone()).or_insert(0);
            *n += 1;
            let n = *n;
            let (rule, premises) = if n == 1 {
                (self.rules.builtin_name(BuiltinKind::CountFirst), vec![term.clone()])
            } else {
                (self.rules.builtin_name(BuiltinKind::CountNext), vec![term.clone(), Term::count(n - 1, term.clone())])
            };
            self.add_checked(Term::count(n, term.clone()), Justification::Rule { rule, premises }, depth + 1);
        }

        stack.push(term.clone());
        let fired: Vec<(String, Term)> =
            self.implications.iter().filter(|(_, p, _)| *p == term).map(|(r, _, c)| (r.clone(), c.clone())).collect();
        for (rule, conclusion) in fired {
            if conclusion.is_occurrence() {
                if stack.contains(&conclusion) {
                    self.diagnostics.push(Diagnostic {
                        code: "CYCLIC_IMPLICATION",
                        message: format!("rule `{rule}` would re-derive `{conclusion}` from itself; skipped"),
                    });
                    continue;
                }
                self.ingest_inner(conclusion, EventOrigin::DerivedEvent, Some((rule, term.clone())), stack);
            } else {
                self.add_checked(conclusion, Justification::Rule { rule, premises: vec![term.clone()] }, depth + 1);
            }
        }
        stack.pop();
    }

    fn depth_limit(&mut self, t: &Term) {
        self.diagnostics.push(Diagnostic {
            code: "DEPTH_LIMIT",
            message: format!("`{t}` has depth {} above the limit {}; dropped", t.depth(), self.config.max_depth),
        });
    }

    fn add_checked(&mut self, t: Term, just: Justification, depth: usize) -> bool {
        if t.depth() > self.config.max_depth {
            self.depth_limit(&t);
            return false;
        }
        self.add(t, just, depth)
    }

    fn add(&mut self, t: Term, just: Justification, depth: usize) -> bool {
        if !self.facts.insert(t.clone()) {
            return false;
        }
        self.derivations.insert(t.clone(), Derivation { fact: t, justification: just, depth });
        true
    }

    /// Applies the fact rules until nothing new is derived or the pass
    /// budget runs out. Each pass sees the facts present at its start.
    pub fn saturate(&mut self) -> SaturationOutcome {
        let rules: Vec<Rule> = self.rules.fact_rules().cloned().collect();
        let mut passes = 0;
        let mut added = 0;
        loop {
            if passes >= self.config.max_iterations {
                self.converged = false;
                self.diagnostics.push(Diagnostic {
                    code: "NOT_CONVERGED",
                    message: format!("no fixpoint after {passes} passes"),
                });
                return SaturationOutcome { converged: false, passes, added };
            }
            passes += 1;
            let mut fresh: BTreeMap<Term, Derivation> = BTreeMap::new();
            for rule in &rules {
                let mut found = Vec::new();
                self.matches(&rule.premises, 0, Bindings::default(), &mut Vec::new(), &mut found);
                for (b, premises) in found {
                    if !rule.guards.iter().all(|g| b.counts.get(&g.var).is_some_and(|&v| g.holds(v))) {
                        continue;
                    }
                    let Some(t) = rule.conclusion.instantiate(&b) else { continue };
                    if self.facts.contains(&t) || fresh.contains_key(&t) {
                        continue;
                    }
                    if t.depth() > self.config.max_depth {
                        if !self.diagnostics.iter().any(|d| d.code == "DEPTH_LIMIT" && d.message.starts_with(&format!("`{t}`"))) {
                            self.depth_limit(&t);
                        }
                        continue;
                    }
                    let depth = 1 + premises.iter().map(|p| self.derivations[p].depth).max().unwrap_or(0);
                    let just = Justification::Rule { rule: rule.name.clone(), premises };
                    fresh.insert(t.clone(), Derivation { fact: t, justification: just, depth });
                }
            }
            if fresh.is_empty() {
                self.converged = true;
                return SaturationOutcome { converged: true, passes, added };
            }
            added += fresh.len();
            for (t, d) in fresh {
                self.facts.insert(t.clone());
                self.derivations.insert(t, d);
            }
        }
    }

    fn matches(
        &self,
        premises: &[Pattern],
        i: usize,
        b: Bindings,
        used: &mut Vec<Term>,
        out: &mut Vec<(Bindings, Vec<Term>)>,
    ) {
        let Some(p) = premises.get(i) else {
            out.push((b, used.clone()));
            return;
        };
        if let Some(t) = p.instantiate(&b) {
            if self.facts.contains(&t) {
                used.push(t);
                self.matches(premises, i + 1, b, used, out);
                used.pop();
            }
            return;
        }
        for f in &self.facts {
            let mut nb = b.clone();
            if p.matches(f, &mut nb) {
                used.push(f.clone());
                self.matches(premises, i + 1, nb, used, out);
                used.pop();
            }
        }
    }

    pub fn check_sequence(&self) -> Vec<OrderViolation> {
        check_sequence(&self.events, &self.rules.orders)
    }

    pub fn verdict(&self) -> Verdict {
        let pick = |pred: &dyn Fn(&Term) -> bool| -> Vec<VerdictItem> {
            self.facts
                .iter()
                .filter(|t| pred(t))
                .map(|t| VerdictItem { fact: t.clone(), derivation: self.derivations[t].clone() })
                .collect()
        };
        Verdict {
            failures: pick(&|t| matches!(t, Term::Op(Modality::Failure, _))),
            warnings: pick(&|t| matches!(t, Term::Op(Modality::Warning, _))),
            resolved: pick(&|t| matches!(t, Term::Op(Modality::Resolved, x) if matches!(**x, Term::Op(Modality::Warning, _)))),
            order_violations: self.check_sequence(),
            facts_total: self.facts.len(),
            converged: self.converged,
        }
    }

    /// Derivation tree of `fact`, expanded down to events and standing facts.
    pub fn explain(&self, fact: &Term) -> Result<ExplainNode, UnknownFact> {
        let d = self.derivations.get(fact).ok_or_else(|| UnknownFact(fact.clone()))?;
        let (origin, children) = match &d.justification {
            Justification::Event { index, origin } => {
                let kind = match origin {
                    EventOrigin::Script => "event",
                    EventOrigin::TraceMapped => "trace event",
                    EventOrigin::DerivedEvent => "derived event",
                };
                (format!("{kind} #{index}"), Vec::new())
            }
            Justification::Standing { name } => (format!("standing fact {name}"), Vec::new()),
            Justification::Reified { rule } => (format!("implication of rule {rule}"), Vec::new()),
            Justification::Rule { rule, premises } => {
                let children = premises.iter().map(|p| self.explain(p)).collect::<Result<Vec<_>, _>>()?;
                (format!("rule {rule}"), children)
            }
        };
        Ok(ExplainNode { fact: fact.clone(), origin, children })
    }
}

/// Prefix discipline per declared order `a1 >> ... >> an`: an occurrence of
/// `ak` is in order once `a1..a(k-1)` have each occurred in order.
pub fn check_sequence(events: &[Event], orders: &[ProtocolOrder]) -> Vec<OrderViolation> {
    let mut out = Vec::new();
    for order in orders {
        let mut seen = vec![false; order.atoms.len()];
        for e in events {
            let Some(atom) = e.term.as_atom() else { continue };
            let Some(k) = order.atoms.iter().position(|a| a == atom) else { continue };
            if seen[..k].iter().all(|&s| s) {
                seen[k] = true;
                continue;
            }
            let expected = (0..order.atoms.len())
                .filter(|&j| !seen[j] && seen[..j].iter().all(|&s| s))
                .map(|j| order.atoms[j].clone())
                .collect();
            out.push(OrderViolation { order: order.name.clone(), index: e.index, atom: atom.to_owned(), expected });
        }
    }
    out.sort_by_key(|v| v.index);
    out
}
