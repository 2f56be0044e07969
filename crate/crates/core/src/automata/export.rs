// SPDX-License-Identifier: Apache-2.0

use serde_json::{json, Value};

use super::ConstraintAutomaton;
use crate::circuit::quote;

/// Structured form `{names, states, initial, transitions[{from,sync,constraint,to}]}`.
pub fn to_json(a: &ConstraintAutomaton) -> Value {
    let mut transitions: Vec<_> = a.transitions.iter().collect();
    transitions.sort();
    json!({
        "names": a.names.iter().map(|n| n.as_str()).collect::<Vec<_>>(),
        "states": a.labels,
        "initial": a.initial,
        "transitions": transitions.iter().map(|t| json!({
            "from": t.from,
            "sync": t.sync.iter().map(|n| n.as_str()).collect::<Vec<_>>(),
            "constraint": t.constraint.to_string(),
            "to": t.to,
        })).collect::<Vec<_>>(),
    })
}

pub fn to_dot(a: &ConstraintAutomaton) -> String {
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  __start [shape=point];\n");
    for (i, label) in a.labels.iter().enumerate() {
        out.push_str(&format!("  s{i} [shape=ellipse, label={}];\n", quote(label)));
    }
    out.push_str(&format!("  __start -> s{};\n", a.initial));
    let mut transitions: Vec<_> = a.transitions.iter().collect();
    transitions.sort();
    for t in transitions {
        let sync: Vec<&str> = t.sync.iter().map(|n| n.as_str()).collect();
        let label = format!("{{{}}} {}", sync.join(","), t.constraint);
        out.push_str(&format!("  s{} -> s{} [label={}];\n", t.from, t.to, quote(&label)));
    }
    out.push_str("}\n");
    out
}
