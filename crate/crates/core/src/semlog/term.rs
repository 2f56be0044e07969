// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;

/// Unary operators of the compliance logic, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    P,
    Very,
    Forbidden,
    Warning,
    Failure,
    Resolved,
    DoubleCheck,
}

impl Modality {
    pub const ALL: [Modality; 7] = [
        Modality::P,
        Modality::Very,
        Modality::Forbidden,
        Modality::Warning,
        Modality::Failure,
        Modality::Resolved,
        Modality::DoubleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Modality::P => "P",
            Modality::Very => "Very",
            Modality::Forbidden => "Forbidden",
            Modality::Warning => "Warning",
            Modality::Failure => "Failure",
            Modality::Resolved => "Resolved",
            Modality::DoubleCheck => "DoubleCheck",
        }
    }

    pub fn from_name(s: &str) -> Option<Modality> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Compliance statuses produced by the checker itself.
    pub fn is_diagnostic(self) -> bool {
        matches!(self, Modality::Forbidden | Modality::Warning | Modality::Failure | Modality::Resolved)
    }
}

/// Ground term. The derived ordering (variant tag, then children, atoms
/// lexicographic) is the canonical order used for every iteration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Atom(String),
    Op(Modality, Box<Term>),
    /// `(n)t`: `t` has occurred at least `n` times.
    Count(u32, Box<Term>),
    /// `(a=>b)`
    Implies(Box<Term>, Box<Term>),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(name.to_owned())
    }

    pub fn op(m: Modality, t: Term) -> Term {
        Term::Op(m, Box::new(t))
    }

    pub fn p(t: Term) -> Term {
        Term::op(Modality::P, t)
    }

    pub fn very(t: Term) -> Term {
        Term::op(Modality::Very, t)
    }

    pub fn count(n: u32, t: Term) -> Term {
        Term::Count(n, Box::new(t))
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::Implies(Box::new(a), Box::new(b))
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Atom(_) => 1,
            Term::Op(_, t) | Term::Count(_, t) => 1 + t.depth(),
            Term::Implies(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Terms whose ingestion counts as an occurrence: atoms and their
    /// intensified forms. Permissions and statuses are states, not events.
    pub fn is_occurrence(&self) -> bool {
        match self {
            Term::Atom(_) => true,
            Term::Op(Modality::Very, t) => t.is_occurrence(),
            _ => false,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Term::Atom(a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Atom(a) => f.write_str(a),
            Term::Op(Modality::Very, t) => write!(f, "(Very){t}"),
            Term::Op(m, t) => write!(f, "{}({t})", m.name()),
            Term::Count(n, t) => write!(f, "({n}){t}"),
            Term::Implies(a, b) => write!(f, "({a}=>{b})"),
        }
    }
}

/// Count position of a pattern: a literal, a variable, or `I+k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CountExpr {
    Lit(u32),
    Var(String),
    Succ(String, u32),
}

impl fmt::Display for CountExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountExpr::Lit(n) => write!(f, "{n}"),
            CountExpr::Var(v) => f.write_str(v),
            CountExpr::Succ(v, k) => write!(f, "{v}+{k}"),
        }
    }
}

/// Term with variables, used in rule premises and conclusions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Var(String),
    Atom(String),
    Op(Modality, Box<Pattern>),
    Count(CountExpr, Box<Pattern>),
    Implies(Box<Pattern>, Box<Pattern>),
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) | Pattern::Atom(v) => f.write_str(v),
            Pattern::Op(Modality::Very, t) => write!(f, "(Very){t}"),
            Pattern::Op(m, t) => write!(f, "{}({t})", m.name()),
            Pattern::Count(n, t) => write!(f, "({n}){t}"),
            Pattern::Implies(a, b) => write!(f, "({a}=>{b})"),
        }
    }
}

/// Variable bindings produced by matching.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    pub terms: BTreeMap<String, Term>,
    pub counts: BTreeMap<String, u32>,
}

impl Pattern {
    pub fn from_term(t: &Term) -> Pattern {
        match t {
            Term::Atom(a) => Pattern::Atom(a.clone()),
            Term::Op(m, t) => Pattern::Op(*m, Box::new(Pattern::from_term(t))),
            Term::Count(n, t) => Pattern::Count(CountExpr::Lit(*n), Box::new(Pattern::from_term(t))),
            Term::Implies(a, b) => Pattern::Implies(Box::new(Pattern::from_term(a)), Box::new(Pattern::from_term(b))),
        }
    }

    /// Term variables (not count variables) in first-occurrence order.
    pub fn term_vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Pattern::Atom(_) => {}
            Pattern::Op(_, p) | Pattern::Count(_, p) => p.term_vars(out),
            Pattern::Implies(a, b) => {
                a.term_vars(out);
                b.term_vars(out);
            }
        }
    }

    pub fn count_vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Count(CountExpr::Var(v) | CountExpr::Succ(v, _), p) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
                p.count_vars(out);
            }
            Pattern::Count(_, p) | Pattern::Op(_, p) => p.count_vars(out),
            Pattern::Implies(a, b) => {
                a.count_vars(out);
                b.count_vars(out);
            }
            Pattern::Var(_) | Pattern::Atom(_) => {}
        }
    }

    pub fn is_ground(&self) -> bool {
        let (mut t, mut c) = (Vec::new(), Vec::new());
        self.term_vars(&mut t);
        self.count_vars(&mut c);
        t.is_empty() && c.is_empty()
    }

    /// Extends `b` so that this pattern equals `t`; false (with `b` possibly
    /// partially extended) on mismatch.
    pub fn matches(&self, t: &Term, b: &mut Bindings) -> bool {
        match (self, t) {
            (Pattern::Var(v), _) => match b.terms.get(v) {
                Some(bound) => bound == t,
                None => {
                    b.terms.insert(v.clone(), t.clone());
                    true
                }
            },
            (Pattern::Atom(a), Term::Atom(x)) => a == x,
            (Pattern::Op(m, p), Term::Op(n, x)) => m == n && p.matches(x, b),
            (Pattern::Count(e, p), Term::Count(n, x)) => {
                let count_ok = match e {
                    CountExpr::Lit(k) => k == n,
                    CountExpr::Var(v) => match b.counts.get(v) {
                        Some(k) => k == n,
                        None => {
                            b.counts.insert(v.clone(), *n);
                            true
                        }
                    },
                    CountExpr::Succ(v, k) => match b.counts.get(v) {
                        Some(i) => i + k == *n,
                        None if *n > *k => {
                            b.counts.insert(v.clone(), n - k);
                            true
                        }
                        None => false,
                    },
                };
                count_ok && p.matches(x, b)
            }
            (Pattern::Implies(pa, pb), Term::Implies(xa, xb)) => pa.matches(xa, b) && pb.matches(xb, b),
            _ => false,
        }
    }

    /// Ground instance under `b`, or `None` if a variable is unbound.
    pub fn instantiate(&self, b: &Bindings) -> Option<Term> {
        Some(match self {
            Pattern::Var(v) => b.terms.get(v)?.clone(),
            Pattern::Atom(a) => Term::Atom(a.clone()),
            Pattern::Op(m, p) => Term::op(*m, p.instantiate(b)?),
            Pattern::Count(e, p) => {
                let n = match e {
                    CountExpr::Lit(n) => *n,
                    CountExpr::Var(v) => *b.counts.get(v)?,
                    CountExpr::Succ(v, k) => b.counts.get(v)?.checked_add(*k)?,
                };
                Term::count(n, p.instantiate(b)?)
            }
            Pattern::Implies(x, y) => Term::implies(x.instantiate(b)?, y.instantiate(b)?),
        })
    }
}
