// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::constraint::project;
use super::{AutomatonError, ConstraintAutomaton, Name, StateId, Transition};

/// Synchronized product. Shared names must fire together; transitions that
/// touch no name of the other automaton may fire alone or together with
/// another such transition. Only states reachable from the joint initial
/// state are kept, and transitions with unsatisfiable constraints are pruned.
pub fn join(a: &ConstraintAutomaton, b: &ConstraintAutomaton) -> ConstraintAutomaton {
    let names: BTreeSet<Name> = a.names.union(&b.names).cloned().collect();
    let alphabet = a.alphabet.union(&b.alphabet).cloned().collect();

    // Each transition keyed by the part of its sync-set the other side sees.
    let key_a: Vec<BTreeSet<Name>> = a.transitions.iter().map(|t| t.sync.intersection(&b.names).cloned().collect()).collect();
    let adj_a = index_by_source(a);
    let mut by_key_b: Vec<HashMap<BTreeSet<Name>, Vec<usize>>> = vec![HashMap::new(); b.state_count()];
    for (i, t) in b.transitions.iter().enumerate() {
        let key: BTreeSet<Name> = t.sync.intersection(&a.names).cloned().collect();
        by_key_b[t.from].entry(key).or_default().push(i);
    }
    let empty = BTreeSet::new();

    let mut out = ConstraintAutomaton { names, labels: Vec::new(), initial: 0, transitions: Vec::new(), alphabet };
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |p: StateId, q: StateId, out: &mut ConstraintAutomaton, queue: &mut VecDeque<(StateId, StateId)>| {
        *index.entry((p, q)).or_insert_with(|| {
            out.labels.push(format!("({},{})", a.labels[p], b.labels[q]));
            queue.push_back((p, q));
            out.labels.len() - 1
        })
    };
    intern(a.initial, b.initial, &mut out, &mut queue);

    let mut next = 0;
    while let Some((p, q)) = queue.pop_front() {
        let from = next;
        next += 1;
        let mut seen: HashSet<Transition> = HashSet::new();
        let mut emit = |sync: BTreeSet<Name>, g: super::DataConstraint, to: (StateId, StateId), out: &mut ConstraintAutomaton, queue: &mut VecDeque<(StateId, StateId)>| {
            let Some(constraint) = project(&g, &sync, &out.alphabet) else { return };
            let to = intern(to.0, to.1, out, queue);
            let t = Transition { from, sync, constraint, to };
            if seen.insert(t.clone()) {
                out.transitions.push(t);
            }
        };

        for &i in &adj_a[p] {
            let t1 = &a.transitions[i];
            if key_a[i].is_empty() {
                emit(t1.sync.clone(), t1.constraint.clone(), (t1.to, q), &mut out, &mut queue);
            }
            if let Some(partners) = by_key_b[q].get(&key_a[i]) {
                for &j in partners {
                    let t2 = &b.transitions[j];
                    let sync = t1.sync.union(&t2.sync).cloned().collect();
                    emit(sync, t1.constraint.and(&t2.constraint), (t1.to, t2.to), &mut out, &mut queue);
                }
            }
        }
        if let Some(alone) = by_key_b[q].get(&empty) {
            for &j in alone {
                let t2 = &b.transitions[j];
                emit(t2.sync.clone(), t2.constraint.clone(), (p, t2.to), &mut out, &mut queue);
            }
        }
    }
    out
}

fn index_by_source(a: &ConstraintAutomaton) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); a.state_count()];
    for (i, t) in a.transitions.iter().enumerate() {
        adj[t.from].push(i);
    }
    adj
}

/// Removes `hidden` from the observable names. Data constraints are
/// existentially projected; steps left with an empty sync-set become internal
/// moves and are folded into the observable steps that follow them.
pub fn hide(a: &ConstraintAutomaton, hidden: &BTreeSet<Name>) -> Result<ConstraintAutomaton, AutomatonError> {
    if let Some(n) = hidden.iter().find(|n| !a.names.contains(*n)) {
        return Err(AutomatonError::UnknownName(n.to_string()));
    }
    if hidden.is_empty() {
        return Ok(a.clone());
    }
    let names: BTreeSet<Name> = a.names.difference(hidden).cloned().collect();

    let mut internal: Vec<Vec<StateId>> = vec![Vec::new(); a.state_count()];
    let mut visible: Vec<Vec<Transition>> = vec![Vec::new(); a.state_count()];
    for t in &a.transitions {
        let sync: BTreeSet<Name> = t.sync.difference(hidden).cloned().collect();
        let Some(constraint) = project(&t.constraint, &sync, &a.alphabet) else { continue };
        if sync.is_empty() {
            internal[t.from].push(t.to);
        } else {
            visible[t.from].push(Transition { from: t.from, sync, constraint, to: t.to });
        }
    }

    let closure = |q: StateId| -> Vec<StateId> {
        let mut seen = vec![false; internal.len()];
        let mut order = vec![q];
        seen[q] = true;
        let mut i = 0;
        while i < order.len() {
            for &r in &internal[order[i]] {
                if !seen[r] {
                    seen[r] = true;
                    order.push(r);
                }
            }
            i += 1;
        }
        order
    };

    let mut out = ConstraintAutomaton {
        names,
        labels: Vec::new(),
        initial: 0,
        transitions: Vec::new(),
        alphabet: a.alphabet.clone(),
    };
    let mut index: HashMap<StateId, StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    index.insert(a.initial, 0);
    out.labels.push(a.labels[a.initial].clone());
    queue.push_back(a.initial);
    while let Some(q) = queue.pop_front() {
        let from = index[&q];
        let mut seen = HashSet::new();
        for r in closure(q) {
            for t in &visible[r] {
                let to = *index.entry(t.to).or_insert_with(|| {
                    out.labels.push(a.labels[t.to].clone());
                    queue.push_back(t.to);
                    out.labels.len() - 1
                });
                let t = Transition { from, sync: t.sync.clone(), constraint: t.constraint.clone(), to };
                if seen.insert(t.clone()) {
                    out.transitions.push(t);
                }
            }
        }
    }
    Ok(out)
}
