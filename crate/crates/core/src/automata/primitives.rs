// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::{AutomatonError, ConstraintAtom, ConstraintAutomaton, DataConstraint, Name, Transition};
use crate::circuit::{Channel, ChannelKind, DataItem, Node, PortKind};

fn single_state(names: BTreeSet<Name>, alphabet: &BTreeSet<DataItem>, label: &str) -> ConstraintAutomaton {
    ConstraintAutomaton {
        names,
        labels: vec![label.to_owned()],
        initial: 0,
        transitions: Vec::new(),
        alphabet: alphabet.clone(),
    }
}

fn edge(from: usize, sync: &[&Name], constraint: DataConstraint, to: usize) -> Transition {
    Transition { from, sync: sync.iter().map(|n| (*n).clone()).collect(), constraint, to }
}

/// Automaton of one channel; its names are the channel's two end names.
pub fn ca_of_channel(ch: &Channel, alphabet: &BTreeSet<DataItem>) -> ConstraintAutomaton {
    let a = Name::from(ch.a_end());
    let b = Name::from(ch.b_end());
    let names: BTreeSet<Name> = [a.clone(), b.clone()].into_iter().collect();
    let mut ca = single_state(names, alphabet, &ch.id);
    let ts = &mut ca.transitions;
    match &ch.kind {
        ChannelKind::Sync => ts.push(edge(0, &[&a, &b], DataConstraint::same(&a, &b), 0)),
        ChannelKind::LossySync => {
            ts.push(edge(0, &[&a, &b], DataConstraint::same(&a, &b), 0));
            ts.push(edge(0, &[&a], DataConstraint::truth(), 0));
        }
        ChannelKind::SyncDrain => ts.push(edge(0, &[&a, &b], DataConstraint::truth(), 0)),
        ChannelKind::AsyncDrain => {
            ts.push(edge(0, &[&a], DataConstraint::truth(), 0));
            ts.push(edge(0, &[&b], DataConstraint::truth(), 0));
        }
        ChannelKind::Filter { accept } => {
            ts.push(edge(
                0,
                &[&a, &b],
                DataConstraint::from_atoms([
                    ConstraintAtom::Same(a.clone(), b.clone()),
                    ConstraintAtom::In(a.clone(), accept.clone()),
                ]),
                0,
            ));
            let rejected: BTreeSet<DataItem> = alphabet.difference(accept).cloned().collect();
            ts.push(edge(0, &[&a], DataConstraint::from_atoms([ConstraintAtom::In(a.clone(), rejected)]), 0));
        }
        ChannelKind::Transform { map } => {
            for v in alphabet {
                let image = map.get(v).cloned().unwrap_or_else(|| v.clone());
                ts.push(edge(
                    0,
                    &[&a, &b],
                    DataConstraint::from_atoms([
                        ConstraintAtom::Is(a.clone(), v.clone()),
                        ConstraintAtom::Is(b.clone(), image),
                    ]),
                    0,
                ));
            }
        }
        ChannelKind::Fifo1 { init } => {
            // state 0 = empty, state i+1 = full(alphabet[i])
            ca.labels = vec![format!("{}:empty", ch.id)];
            for (i, v) in alphabet.iter().enumerate() {
                ca.labels.push(format!("{}:full({v})", ch.id));
                let full = i + 1;
                ca.transitions.push(edge(0, &[&a], DataConstraint::from_atoms([ConstraintAtom::Is(a.clone(), v.clone())]), full));
                ca.transitions.push(edge(full, &[&b], DataConstraint::from_atoms([ConstraintAtom::Is(b.clone(), v.clone())]), 0));
                if init.as_ref() == Some(v) {
                    ca.initial = full;
                }
            }
        }
    }
    ca
}

/// Automaton of a node: a nondeterministic merger over its inputs combined
/// with an atomic replicator to all of its outputs.
pub fn ca_of_node(node: &Node, alphabet: &BTreeSet<DataItem>) -> Result<ConstraintAutomaton, AutomatonError> {
    let mut inputs: Vec<Name> = node.incoming.iter().map(|s| Name::from(s.as_str())).collect();
    let mut outputs: Vec<Name> = node.outgoing.iter().map(|s| Name::from(s.as_str())).collect();
    match node.boundary.as_ref().map(|p| p.kind) {
        Some(PortKind::BoundaryIn) => inputs.push(Name::from(node.name.as_str())),
        Some(PortKind::BoundaryOut) => outputs.push(Name::from(node.name.as_str())),
        _ => {}
    }
    if inputs.is_empty() && outputs.is_empty() {
        return Err(AutomatonError::EmptyNode(node.name.clone()));
    }
    let names: BTreeSet<Name> = inputs.iter().chain(&outputs).cloned().collect();
    let mut ca = single_state(names, alphabet, &node.name);
    inputs.sort();
    for i in &inputs {
        let sync = std::iter::once(i).chain(&outputs).cloned().collect();
        let constraint = DataConstraint::from_atoms(outputs.iter().map(|o| ConstraintAtom::Same(i.clone(), o.clone())));
        ca.transitions.push(Transition { from: 0, sync, constraint, to: 0 });
    }
    Ok(ca)
}
