// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::{ca_of_channel, ca_of_node, hide, join, AutomatonError, ConstraintAutomaton, Name};
use crate::circuit::{validate_circuit, Circuit, InvalidCircuit};

/// Per-primitive automata: channels in declaration order, then nodes by name.
pub fn component_automata(c: &Circuit) -> Result<Vec<ConstraintAutomaton>, AutomatonError> {
    let mut parts: Vec<ConstraintAutomaton> = c.channels.iter().map(|ch| ca_of_channel(ch, &c.alphabet)).collect();
    for node in c.nodes().values() {
        parts.push(ca_of_node(node, &c.alphabet)?);
    }
    Ok(parts)
}

/// Left fold of [`join`] in the given order.
pub fn join_all(parts: &[ConstraintAutomaton]) -> ConstraintAutomaton {
    parts.iter().fold(ConstraintAutomaton::identity(), |acc, p| join(&acc, p))
}

/// Joins every primitive of `c` and hides all names but the boundary ports.
///
/// Parts are joined in a connectivity-guided order: each step picks the part
/// sharing the most names with the product so far. This keeps intermediate
/// products small; the result does not depend on the order up to
/// bisimilarity.
pub fn compile(c: &Circuit) -> Result<ConstraintAutomaton, AutomatonError> {
    let report = validate_circuit(c);
    if !report.is_ok() {
        return Err(InvalidCircuit { name: c.name.clone(), report }.into());
    }
    let mut remaining = component_automata(c)?;
    let mut acc = ConstraintAutomaton::identity();
    while !remaining.is_empty() {
        let pick = remaining
            .iter()
            .enumerate()
            .max_by_key(|(i, p)| (p.names.intersection(&acc.names).count(), std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .expect("non-empty");
        let part = remaining.remove(pick);
        acc = join(&acc, &part);
    }
    let boundary: BTreeSet<Name> = c.ports.iter().map(|p| Name::from(p.name.as_str())).collect();
    let internal: BTreeSet<Name> = acc.names.difference(&boundary).cloned().collect();
    let mut out = hide(&acc, &internal)?;
    out.names = boundary;
    out.alphabet = c.alphabet.clone();
    Ok(out)
}
