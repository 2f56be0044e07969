// SPDX-License-Identifier: Apache-2.0

//! Verification passes over constraint automata.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::automata::{sat_assignments, AutomatonError, ConstraintAutomaton, DataAssignment, Name, StateId};

/// One observable step: the firing names (the assignment's keys) and their data.
pub type Step = DataAssignment;

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceWord(pub Vec<Step>);

impl fmt::Display for TraceWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let steps: Vec<String> = self
            .0
            .iter()
            .map(|s| {
                let items: Vec<String> = s.iter().map(|(n, v)| format!("{n}={v}")).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        f.write_str(&steps.join("·"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateRef {
    pub index: StateId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub reachable: usize,
    pub transitions: usize,
    pub deadlocks: Vec<StateRef>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn deadlock_free(&self) -> bool {
        self.deadlocks.is_empty()
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "reachable states: {}", self.reachable)?;
        writeln!(f, "transitions: {}", self.transitions)?;
        if self.deadlocks.is_empty() {
            writeln!(f, "deadlocks: none")?;
        } else {
            writeln!(f, "deadlocks: {}", self.deadlocks.len())?;
            for d in &self.deadlocks {
                writeln!(f, "  s{} {}", d.index, d.label)?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// States reachable from the initial state through satisfiable transitions.
pub fn reachable(a: &ConstraintAutomaton) -> BTreeSet<StateId> {
    let adj = a.adjacency();
    let mut seen = BTreeSet::from([a.initial]);
    let mut queue = VecDeque::from([a.initial]);
    while let Some(q) = queue.pop_front() {
        for t in &adj[q] {
            if a.is_satisfiable(t) && seen.insert(t.to) {
                queue.push_back(t.to);
            }
        }
    }
    seen
}

/// Reachable states without any satisfiable outgoing transition.
pub fn deadlocks(a: &ConstraintAutomaton) -> Vec<StateId> {
    let adj = a.adjacency();
    reachable(a).into_iter().filter(|&q| !adj[q].iter().any(|t| a.is_satisfiable(t))).collect()
}

pub fn analyze(a: &ConstraintAutomaton) -> AnalysisReport {
    let reach = reachable(a);
    let deadlocks: Vec<StateRef> =
        deadlocks(a).into_iter().map(|index| StateRef { index, label: a.labels[index].clone() }).collect();
    let mut notes = Vec::new();
    if reach.len() < a.state_count() {
        notes.push(format!("{} state(s) unreachable", a.state_count() - reach.len()));
    }
    AnalysisReport { reachable: reach.len(), transitions: a.transitions.len(), deadlocks, notes }
}

/// Every word of length at most `k` labelling a path from the initial state.
pub fn traces_upto(a: &ConstraintAutomaton, k: usize) -> BTreeSet<TraceWord> {
    traces_upto_visible(a, &a.names, k)
}

/// Bounded trace language observed through `visible`: each step is projected
/// onto the visible names and steps that project to nothing are silent.
pub fn traces_upto_visible(a: &ConstraintAutomaton, visible: &BTreeSet<Name>, k: usize) -> BTreeSet<TraceWord> {
    let lts = Lts::expand(a, visible);
    let mut out = BTreeSet::new();
    let start = lts.closure(&BTreeSet::from([a.initial]));
    let mut word = Vec::new();
    collect(&lts, &start, k, &mut word, &mut out);
    out
}

fn collect(lts: &Lts, set: &BTreeSet<StateId>, k: usize, word: &mut Vec<Step>, out: &mut BTreeSet<TraceWord>) {
    out.insert(TraceWord(word.clone()));
    if k == 0 {
        return;
    }
    for (label, next) in lts.successors(set) {
        word.push(lts.labels[label].clone());
        collect(lts, &next, k - 1, word, out);
        word.pop();
    }
}

/// Decides equality of the visible bounded trace languages of `a` and `b`
/// without materializing them, by walking the two subset constructions in
/// lockstep.
pub fn same_traces_upto(a: &ConstraintAutomaton, b: &ConstraintAutomaton, visible: &BTreeSet<Name>, k: usize) -> bool {
    let la = Lts::expand(a, visible);
    let lb = Lts::expand(b, visible);
    let mut frontier = vec![(la.closure(&BTreeSet::from([a.initial])), lb.closure(&BTreeSet::from([b.initial])))];
    let mut seen = std::collections::HashSet::new();
    for _ in 0..k {
        let mut next = Vec::new();
        for (sa, sb) in frontier {
            let na: BTreeMap<&Step, BTreeSet<StateId>> =
                la.successors(&sa).into_iter().map(|(l, s)| (&la.labels[l], s)).collect();
            let nb: BTreeMap<&Step, BTreeSet<StateId>> =
                lb.successors(&sb).into_iter().map(|(l, s)| (&lb.labels[l], s)).collect();
            if !na.keys().eq(nb.keys()) {
                return false;
            }
            for ((_, xa), (_, xb)) in na.into_iter().zip(nb) {
                if seen.insert((xa.clone(), xb.clone())) {
                    next.push((xa, xb));
                }
            }
        }
        frontier = next;
    }
    true
}

/// Labelled transition system with one edge per satisfying assignment.
struct Lts {
    labels: Vec<Step>,
    /// per state: (label index or None for silent, target)
    edges: Vec<Vec<(Option<usize>, StateId)>>,
}

impl Lts {
    fn expand(a: &ConstraintAutomaton, visible: &BTreeSet<Name>) -> Lts {
        let mut labels = Vec::new();
        let mut ids: HashMap<Step, usize> = HashMap::new();
        let mut edges = vec![Vec::new(); a.state_count()];
        for t in &a.transitions {
            let mut local: BTreeSet<Option<usize>> = BTreeSet::new();
            for asg in sat_assignments(&t.constraint, &t.sync, &a.alphabet) {
                let step: Step = asg.into_iter().filter(|(n, _)| visible.contains(n)).collect();
                if step.is_empty() {
                    local.insert(None);
                    continue;
                }
                let id = *ids.entry(step.clone()).or_insert_with(|| {
                    labels.push(step);
                    labels.len() - 1
                });
                local.insert(Some(id));
            }
            edges[t.from].extend(local.into_iter().map(|l| (l, t.to)));
        }
        Lts { labels, edges }
    }

    fn closure(&self, set: &BTreeSet<StateId>) -> BTreeSet<StateId> {
        let mut out = set.clone();
        let mut stack: Vec<StateId> = set.iter().copied().collect();
        while let Some(q) = stack.pop() {
            for &(l, r) in &self.edges[q] {
                if l.is_none() && out.insert(r) {
                    stack.push(r);
                }
            }
        }
        out
    }

    /// Visible successors of a closed state set, grouped by label, in label order.
    fn successors(&self, set: &BTreeSet<StateId>) -> Vec<(usize, BTreeSet<StateId>)> {
        let mut by_label: BTreeMap<&Step, (usize, BTreeSet<StateId>)> = BTreeMap::new();
        for &q in set {
            for &(l, r) in &self.edges[q] {
                if let Some(l) = l {
                    by_label.entry(&self.labels[l]).or_insert_with(|| (l, BTreeSet::new())).1.insert(r);
                }
            }
        }
        by_label.into_values().map(|(l, s)| (l, self.closure(&s))).collect()
    }
}

/// Strong bisimilarity of the initial states, each (sync-set, satisfying
/// assignment) pair being one action label.
pub fn bisimilar(a: &ConstraintAutomaton, b: &ConstraintAutomaton) -> Result<bool, AutomatonError> {
    if a.names != b.names {
        return Err(AutomatonError::NameMismatch {
            left: a.names.iter().map(|n| n.to_string()).collect(),
            right: b.names.iter().map(|n| n.to_string()).collect(),
        });
    }
    // Disjoint union: states of `b` are offset by |a|.
    let offset = a.state_count();
    let total = offset + b.state_count();
    let mut labels: HashMap<Step, usize> = HashMap::new();
    let mut edges: Vec<BTreeSet<(usize, StateId)>> = vec![BTreeSet::new(); total];
    for (ca, base) in [(a, 0), (b, offset)] {
        for t in &ca.transitions {
            for asg in sat_assignments(&t.constraint, &t.sync, &ca.alphabet) {
                let next = labels.len();
                let l = *labels.entry(asg).or_insert(next);
                edges[base + t.from].insert((l, base + t.to));
            }
        }
    }

    // Signature-based partition refinement until the block count is stable.
    let mut block = vec![0usize; total];
    let mut count = 1;
    loop {
        let mut sigs: HashMap<(usize, BTreeSet<(usize, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; total];
        for s in 0..total {
            let sig: BTreeSet<(usize, usize)> = edges[s].iter().map(|&(l, t)| (l, block[t])).collect();
            let n = sigs.len();
            next[s] = *sigs.entry((block[s], sig)).or_insert(n);
        }
        let new_count = sigs.len();
        block = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    Ok(block[a.initial] == block[offset + b.initial])
}
