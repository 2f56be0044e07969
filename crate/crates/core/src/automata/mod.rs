// SPDX-License-Identifier: Apache-2.0

//! Constraint-automata semantics for circuits.
//!
//! Every channel and every node gets a small automaton; a circuit's meaning is
//! the synchronized product of all of them with the internal channel-end names
//! hidden.

mod compile;
mod constraint;
mod export;
mod primitives;
mod product;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{DataItem, InvalidCircuit};

pub use compile::{compile, component_automata, join_all};
pub use constraint::{project, sat_assignments, satisfiable, ConstraintAtom, DataAssignment, DataConstraint, Solution};
pub use export::{to_dot, to_json};
pub use primitives::{ca_of_channel, ca_of_node};
pub use product::{hide, join};

/// Port or channel-end name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(Arc<str>);

impl Name {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Name {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name(Arc::from(s))
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: StateId,
    pub sync: BTreeSet<Name>,
    pub constraint: DataConstraint,
    pub to: StateId,
}

/// A constraint automaton over a finite data alphabet.
///
/// States are dense indices; `labels[i]` is a human-readable name for state
/// `i` (product states are labelled `(left,right)`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintAutomaton {
    pub names: BTreeSet<Name>,
    pub labels: Vec<String>,
    pub initial: StateId,
    pub transitions: Vec<Transition>,
    pub alphabet: BTreeSet<DataItem>,
}

impl ConstraintAutomaton {
    /// Single-state automaton with no names and no transitions; neutral for [`join`].
    pub fn identity() -> Self {
        ConstraintAutomaton {
            names: BTreeSet::new(),
            labels: vec!["id".to_owned()],
            initial: 0,
            transitions: Vec::new(),
            alphabet: BTreeSet::new(),
        }
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn outgoing(&self, state: StateId) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.from == state)
    }

    /// Transitions grouped by source state, preserving order.
    pub fn adjacency(&self) -> Vec<Vec<&Transition>> {
        let mut adj = vec![Vec::new(); self.labels.len()];
        for t in &self.transitions {
            adj[t.from].push(t);
        }
        adj
    }

    /// Copy with every name passed through `f`.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> ConstraintAutomaton {
        let map = |n: &Name| Name::from(f(n.as_str()));
        let mut out = self.clone();
        out.names = self.names.iter().map(map).collect();
        for t in &mut out.transitions {
            t.sync = t.sync.iter().map(map).collect();
            t.constraint = DataConstraint::from_atoms(t.constraint.atoms().iter().map(|atom| match atom {
                ConstraintAtom::Same(x, y) => ConstraintAtom::Same(map(x), map(y)),
                ConstraintAtom::Is(x, v) => ConstraintAtom::Is(map(x), v.clone()),
                ConstraintAtom::In(x, s) => ConstraintAtom::In(map(x), s.clone()),
            }));
        }
        out
    }

    pub fn is_satisfiable(&self, t: &Transition) -> bool {
        satisfiable(&t.constraint, &t.sync, &self.alphabet)
    }

    /// Checks the structural invariants: non-empty sync-sets, constraints
    /// over the sync-set only, sync-sets within `names`, valid state indices.
    pub fn check(&self) -> Result<(), AutomatonError> {
        if self.initial >= self.labels.len() {
            return Err(AutomatonError::Malformed(format!("initial state {} out of range", self.initial)));
        }
        for t in &self.transitions {
            if t.sync.is_empty() {
                return Err(AutomatonError::Malformed(format!("empty sync-set on {} -> {}", t.from, t.to)));
            }
            if t.from >= self.labels.len() || t.to >= self.labels.len() {
                return Err(AutomatonError::Malformed(format!("state out of range on {} -> {}", t.from, t.to)));
            }
            if let Some(n) = t.sync.iter().find(|n| !self.names.contains(*n)) {
                return Err(AutomatonError::Malformed(format!("sync name `{n}` not among the automaton's names")));
            }
            if let Some(n) = t.constraint.names().into_iter().find(|n| !t.sync.contains(*n)) {
                return Err(AutomatonError::Malformed(format!("constraint mentions `{n}` outside its sync-set")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum AutomatonError {
    #[error("node `{0}` has neither inputs nor outputs (EMPTY_NODE)")]
    EmptyNode(String),
    #[error("cannot hide unknown name `{0}` (UNKNOWN_NAME)")]
    UnknownName(String),
    #[error("name sets differ: {left:?} vs {right:?}")]
    NameMismatch { left: Vec<String>, right: Vec<String> },
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error(transparent)]
    Invalid(#[from] InvalidCircuit),
}

impl AutomatonError {
    pub fn code(&self) -> &'static str {
        match self {
            AutomatonError::EmptyNode(_) => "EMPTY_NODE",
            AutomatonError::UnknownName(_) => "UNKNOWN_NAME",
            AutomatonError::NameMismatch { .. } => "NAME_MISMATCH",
            AutomatonError::Malformed(_) => "MALFORMED",
            AutomatonError::Invalid(_) => "INVALID_CIRCUIT",
        }
    }
}
