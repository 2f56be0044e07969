// SPDX-License-Identifier: Apache-2.0

//! In-memory model of coordination circuits.
//!
//! A circuit is a set of typed channels whose ends meet at nodes. Nodes are
//! implicit: every identifier used as a channel end denotes a node. Only the
//! boundary ports (the nodes the environment talks to) are declared.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A token of a circuit's finite data alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DataItem(String);

impl DataItem {
    pub fn new(token: impl Into<String>) -> Self {
        DataItem(token.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DataItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DataItem {
    fn from(s: &str) -> Self {
        DataItem(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PortKind {
    BoundaryIn,
    BoundaryOut,
    InternalEnd,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortId {
    pub name: String,
    pub kind: PortKind,
}

impl PortId {
    pub fn input(name: impl Into<String>) -> Self {
        PortId { name: name.into(), kind: PortKind::BoundaryIn }
    }

    pub fn output(name: impl Into<String>) -> Self {
        PortId { name: name.into(), kind: PortKind::BoundaryOut }
    }
}

/// Channel kind together with its kind-specific parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelKind {
    Sync,
    LossySync,
    Fifo1 { init: Option<DataItem> },
    SyncDrain,
    AsyncDrain,
    Filter { accept: BTreeSet<DataItem> },
    Transform { map: BTreeMap<DataItem, DataItem> },
}

impl ChannelKind {
    /// Keyword used by the circuit DSL.
    pub fn keyword(&self) -> &'static str {
        match self {
            ChannelKind::Sync => "sync",
            ChannelKind::LossySync => "lossysync",
            ChannelKind::Fifo1 { .. } => "fifo1",
            ChannelKind::SyncDrain => "syncdrain",
            ChannelKind::AsyncDrain => "asyncdrain",
            ChannelKind::Filter { .. } => "filter",
            ChannelKind::Transform { .. } => "transform",
        }
    }

    /// Drains have two input ends; every other kind is a-in, b-out.
    pub fn is_drain(&self) -> bool {
        matches!(self, ChannelKind::SyncDrain | ChannelKind::AsyncDrain)
    }

    /// Parameters in DSL syntax, e.g. `init=tick` or `accept={ok}`.
    pub fn params_text(&self) -> Option<String> {
        fn items<'a>(it: impl Iterator<Item = &'a DataItem>) -> String {
            it.map(DataItem::as_str).collect::<Vec<_>>().join(", ")
        }
        match self {
            ChannelKind::Fifo1 { init: Some(v) } => Some(format!("init={v}")),
            ChannelKind::Filter { accept } => Some(format!("accept={{{}}}", items(accept.iter()))),
            ChannelKind::Transform { map } => Some(format!(
                "map={{{}}}",
                map.iter().map(|(k, v)| format!("{k}->{v}")).collect::<Vec<_>>().join(", ")
            )),
            _ => None,
        }
    }

    /// Keyword plus parameters, used for labels.
    pub fn label(&self) -> String {
        match self.params_text() {
            Some(p) => format!("{} {}", self.keyword(), p),
            None => self.keyword().to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Channel {
    pub id: String,
    pub kind: ChannelKind,
    pub end_a: String,
    pub end_b: String,
}

impl Channel {
    pub fn new(id: impl Into<String>, kind: ChannelKind, end_a: impl Into<String>, end_b: impl Into<String>) -> Self {
        Channel { id: id.into(), kind, end_a: end_a.into(), end_b: end_b.into() }
    }

    /// Internal name of the `a` end.
    pub fn a_end(&self) -> String {
        format!("{}.a", self.id)
    }

    /// Internal name of the `b` end.
    pub fn b_end(&self) -> String {
        format!("{}.b", self.id)
    }
}

/// A node as derived from the channels attached to it.
///
/// `incoming` holds channel ends that write into the node, `outgoing` holds
/// ends the node writes into (including both ends of a drain).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Node {
    pub name: String,
    pub incoming: BTreeSet<String>,
    pub outgoing: BTreeSet<String>,
    pub boundary: Option<PortId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub name: String,
    pub alphabet: BTreeSet<DataItem>,
    pub ports: BTreeSet<PortId>,
    pub channels: Vec<Channel>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, alphabet: impl IntoIterator<Item = DataItem>) -> Self {
        Circuit {
            name: name.into(),
            alphabet: alphabet.into_iter().collect(),
            ports: BTreeSet::new(),
            channels: Vec::new(),
        }
    }

    pub fn with_port(mut self, port: PortId) -> Self {
        self.ports.insert(port);
        self
    }

    /// Appends a channel with the next sequential id (`c1`, `c2`, ...).
    pub fn with_channel(mut self, kind: ChannelKind, a: &str, b: &str) -> Self {
        self.add_channel(kind, a, b);
        self
    }

    pub fn add_channel(&mut self, kind: ChannelKind, a: &str, b: &str) -> &Channel {
        let id = format!("c{}", self.channels.len() + 1);
        self.channels.push(Channel::new(id, kind, a, b));
        self.channels.last().expect("just pushed")
    }

    pub fn port(&self, name: &str) -> Option<&PortId> {
        self.ports.iter().find(|p| p.name == name)
    }

    /// All nodes, auto-created from channel ends and declared ports.
    pub fn nodes(&self) -> BTreeMap<String, Node> {
        fn entry<'a>(nodes: &'a mut BTreeMap<String, Node>, name: &str) -> &'a mut Node {
            nodes.entry(name.to_owned()).or_insert_with(|| Node { name: name.to_owned(), ..Node::default() })
        }
        let mut nodes: BTreeMap<String, Node> = BTreeMap::new();
        for ch in &self.channels {
            entry(&mut nodes, &ch.end_a).outgoing.insert(ch.a_end());
            if ch.kind.is_drain() {
                entry(&mut nodes, &ch.end_b).outgoing.insert(ch.b_end());
            } else {
                entry(&mut nodes, &ch.end_b).incoming.insert(ch.b_end());
            }
        }
        for p in &self.ports {
            entry(&mut nodes, &p.name).boundary = Some(p.clone());
        }
        nodes
    }

    /// Structural equality up to channel-id renaming.
    pub fn isomorphic(&self, other: &Circuit) -> bool {
        fn shape(c: &Circuit) -> Vec<(&ChannelKind, &str, &str)> {
            let mut v: Vec<_> = c.channels.iter().map(|ch| (&ch.kind, ch.end_a.as_str(), ch.end_b.as_str())).collect();
            v.sort();
            v
        }
        self.name == other.name
            && self.alphabet == other.alphabet
            && self.ports == other.ports
            && shape(self) == shape(other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: &'static str,
    /// Offending element: a channel id, node name or port name.
    pub element: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.errors.iter().chain(&self.warnings).any(|f| f.code == code)
    }

    fn error(&mut self, code: &'static str, element: impl Into<String>, message: String) {
        self.errors.push(Finding { severity: Severity::Error, code, element: element.into(), message });
    }

    fn warning(&mut self, code: &'static str, element: impl Into<String>, message: String) {
        self.warnings.push(Finding { severity: Severity::Warning, code, element: element.into(), message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in self.errors.iter().chain(&self.warnings) {
            let sev = match x.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{sev}[{}] {}: {}", x.code, x.element, x.message)?;
        }
        write!(f, "{} error(s), {} warning(s)", self.errors.len(), self.warnings.len())
    }
}

#[derive(Debug, Error)]
#[error("invalid circuit `{name}`: {}", .report.errors.iter().map(|e| e.code).collect::<Vec<_>>().join(", "))]
pub struct InvalidCircuit {
    pub name: String,
    pub report: ValidationReport,
}

/// Checks every structural invariant of `c`. Problems are returned as data.
pub fn validate_circuit(c: &Circuit) -> ValidationReport {
    let mut r = ValidationReport::default();

    if c.alphabet.is_empty() {
        r.error("EMPTY_ALPHABET", &c.name, "data alphabet must not be empty".into());
    }

    let mut seen_ids = BTreeSet::new();
    for ch in &c.channels {
        if !seen_ids.insert(ch.id.as_str()) {
            r.error("DUPLICATE_CHANNEL_ID", &ch.id, format!("channel id `{}` used more than once", ch.id));
        }
        match &ch.kind {
            ChannelKind::Fifo1 { init: Some(v) } if !c.alphabet.contains(v) => {
                r.error("INIT_NOT_IN_ALPHABET", &ch.id, format!("initial item `{v}` is not in the alphabet"));
            }
            ChannelKind::Filter { accept } => {
                for v in accept.iter().filter(|v| !c.alphabet.contains(*v)) {
                    r.error("ACCEPT_NOT_IN_ALPHABET", &ch.id, format!("accepted item `{v}` is not in the alphabet"));
                }
            }
            ChannelKind::Transform { map } => {
                for (k, v) in map {
                    for x in [k, v] {
                        if !c.alphabet.contains(x) {
                            r.error("MAP_NOT_IN_ALPHABET", &ch.id, format!("mapped item `{x}` is not in the alphabet"));
                        }
                    }
                }
                for v in c.alphabet.iter().filter(|v| !map.contains_key(*v)) {
                    r.error("MAP_NOT_TOTAL", &ch.id, format!("transform map has no image for `{v}`"));
                }
            }
            _ => {}
        }
    }

    let mut dirs: BTreeMap<&str, BTreeSet<PortKind>> = BTreeMap::new();
    for p in &c.ports {
        dirs.entry(p.name.as_str()).or_default().insert(p.kind);
        if p.kind == PortKind::InternalEnd {
            r.error("PORT_NOT_BOUNDARY", &p.name, format!("port `{}` must be declared in or out", p.name));
        }
    }
    for (name, kinds) in &dirs {
        if kinds.contains(&PortKind::BoundaryIn) && kinds.contains(&PortKind::BoundaryOut) {
            r.error("PORT_BOTH_DIRECTIONS", *name, format!("port `{name}` is declared both in and out"));
        }
    }

    let nodes = c.nodes();
    for node in nodes.values() {
        match node.boundary.as_ref().map(|p| p.kind) {
            Some(PortKind::BoundaryIn) => {
                if !node.incoming.is_empty() {
                    r.error(
                        "BOUNDARY_IN_HAS_INCOMING",
                        &node.name,
                        format!("input port `{}` has channel ends writing into it", node.name),
                    );
                }
                if node.outgoing.is_empty() {
                    r.error(
                        "BOUNDARY_IN_NO_OUTGOING",
                        &node.name,
                        format!("input port `{}` feeds no channel", node.name),
                    );
                }
            }
            Some(PortKind::BoundaryOut) => {
                if node.incoming.is_empty() {
                    r.error(
                        "BOUNDARY_OUT_NO_INCOMING",
                        &node.name,
                        format!("output port `{}` is fed by no channel", node.name),
                    );
                }
                if !node.outgoing.is_empty() {
                    r.warning(
                        "BOUNDARY_OUT_HAS_OUTGOING",
                        &node.name,
                        format!("output port `{}` also writes into channels", node.name),
                    );
                }
            }
            _ => {}
        }
    }

    let components = connected_components(c, &nodes);
    if components.len() > 1 {
        for comp in &components[1..] {
            let members: Vec<&str> = comp.iter().map(String::as_str).collect();
            r.warning(
                "DISCONNECTED",
                members[0],
                format!("nodes {{{}}} are disconnected from node `{}`", members.join(", "), components[0][0]),
            );
        }
    }
    r
}

/// Connected components of the node graph, each sorted, ordered by first member.
fn connected_components(c: &Circuit, nodes: &BTreeMap<String, Node>) -> Vec<Vec<String>> {
    let index: BTreeMap<&str, usize> = nodes.keys().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut parent: Vec<usize> = (0..index.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for ch in &c.channels {
        let (a, b) = (find(&mut parent, index[ch.end_a.as_str()]), find(&mut parent, index[ch.end_b.as_str()]));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (name, &i) in &index {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push((*name).to_owned());
    }
    groups.into_values().collect()
}

/// Declared boundary ports, split into inputs and outputs.
pub fn boundary_ports(c: &Circuit) -> Result<(BTreeSet<PortId>, BTreeSet<PortId>), InvalidCircuit> {
    let report = validate_circuit(c);
    if !report.is_ok() {
        return Err(InvalidCircuit { name: c.name.clone(), report });
    }
    let (ins, outs) = c.ports.iter().cloned().partition(|p| p.kind == PortKind::BoundaryIn);
    Ok((ins, outs))
}

/// Renders the circuit as a DOT digraph. Output is deterministic.
pub fn export_dot(c: &Circuit) -> String {
    let mut out = format!("digraph {} {{\n  rankdir=LR;\n", quote(&c.name));
    for (name, node) in c.nodes() {
        let attrs = match node.boundary.as_ref().map(|p| p.kind) {
            Some(PortKind::BoundaryIn) => format!("shape=box, style=bold, label={}", quote(&format!("{name} (in)"))),
            Some(PortKind::BoundaryOut) => format!("shape=box, style=bold, label={}", quote(&format!("{name} (out)"))),
            _ => "shape=circle".to_owned(),
        };
        out.push_str(&format!("  {} [{attrs}];\n", quote(&name)));
    }
    for ch in &c.channels {
        let style = match ch.kind {
            ChannelKind::SyncDrain | ChannelKind::AsyncDrain => ", dir=both, arrowhead=inv, arrowtail=inv",
            ChannelKind::LossySync => ", style=dashed",
            _ => "",
        };
        out.push_str(&format!(
            "  {} -> {} [label={}, id={}{style}];\n",
            quote(&ch.end_a),
            quote(&ch.end_b),
            quote(&ch.kind.label()),
            quote(&ch.id)
        ));
    }
    out.push_str("}\n");
    out
}

pub(crate) fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> BTreeSet<DataItem> {
        ["ok", "bad"].into_iter().map(DataItem::from).collect()
    }

    fn minimal() -> Circuit {
        Circuit::new("t", ab())
            .with_port(PortId::input("a"))
            .with_port(PortId::output("b"))
            .with_channel(ChannelKind::Sync, "a", "b")
    }

    #[test]
    fn minimal_sync_is_valid() {
        let r = validate_circuit(&minimal());
        assert!(r.is_ok(), "{r}");
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn fifo_init_outside_alphabet() {
        let c = Circuit::new("t", ab()).with_channel(ChannelKind::Fifo1 { init: Some("zap".into()) }, "a", "b");
        let r = validate_circuit(&c);
        assert!(r.has_code("INIT_NOT_IN_ALPHABET"));
        assert_eq!(r.errors[0].element, "c1");
    }

    #[test]
    fn undeclared_nodes_are_created_and_isolated_parts_warned() {
        let c = minimal().with_channel(ChannelKind::Sync, "x", "y");
        let nodes = c.nodes();
        assert!(nodes.contains_key("x") && nodes.contains_key("y"));
        let r = validate_circuit(&c);
        assert!(r.is_ok());
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].code, "DISCONNECTED");
        assert_eq!(r.warnings[0].element, "x");
    }

    #[test]
    fn boundary_direction_rules() {
        let c = Circuit::new("t", ab())
            .with_port(PortId::input("b"))
            .with_port(PortId::output("a"))
            .with_channel(ChannelKind::Sync, "a", "b");
        let r = validate_circuit(&c);
        assert!(r.has_code("BOUNDARY_IN_HAS_INCOMING"));
        assert!(r.has_code("BOUNDARY_IN_NO_OUTGOING"));
        assert!(r.has_code("BOUNDARY_OUT_NO_INCOMING"));
        assert!(r.has_code("BOUNDARY_OUT_HAS_OUTGOING"));

        let both = minimal().with_port(PortId::output("a"));
        assert!(validate_circuit(&both).has_code("PORT_BOTH_DIRECTIONS"));
    }

    #[test]
    fn transform_must_be_total() {
        let map = [("ok".into(), "bad".into())].into_iter().collect();
        let c = Circuit::new("t", ab()).with_channel(ChannelKind::Transform { map }, "a", "b");
        assert!(validate_circuit(&c).has_code("MAP_NOT_TOTAL"));
        let c = Circuit::new("t", ab())
            .with_channel(ChannelKind::Filter { accept: ["zz".into()].into_iter().collect() }, "a", "b");
        assert!(validate_circuit(&c).has_code("ACCEPT_NOT_IN_ALPHABET"));
        assert!(validate_circuit(&Circuit::new("t", [])).has_code("EMPTY_ALPHABET"));
    }

    #[test]
    fn drains_have_two_outgoing_ends() {
        let c = Circuit::new("t", ab()).with_channel(ChannelKind::SyncDrain, "a", "b");
        let nodes = c.nodes();
        assert_eq!(nodes["a"].outgoing.len(), 1);
        assert_eq!(nodes["b"].outgoing.len(), 1);
        assert!(nodes["b"].incoming.is_empty());
    }

    #[test]
    fn boundary_ports_partitions() {
        let (ins, outs) = boundary_ports(&minimal()).unwrap();
        assert_eq!(ins.into_iter().map(|p| p.name).collect::<Vec<_>>(), ["a"]);
        assert_eq!(outs.into_iter().map(|p| p.name).collect::<Vec<_>>(), ["b"]);

        let empty = Circuit::new("e", ab()).with_channel(ChannelKind::Sync, "x", "y");
        let (ins, outs) = boundary_ports(&empty).unwrap();
        assert!(ins.is_empty() && outs.is_empty());

        let bad = Circuit::new("t", ab()).with_channel(ChannelKind::Fifo1 { init: Some("zap".into()) }, "a", "b");
        assert!(boundary_ports(&bad).is_err());
    }

    #[test]
    fn dot_export() {
        let empty = Circuit::new("e", ab());
        let text = export_dot(&empty);
        assert_eq!(text, "digraph \"e\" {\n  rankdir=LR;\n}\n");

        let text = export_dot(&minimal());
        assert_eq!(text.matches("->").count(), 1);
        assert!(text.contains("label=\"sync\""));
        assert_eq!(text, export_dot(&minimal()));
        assert!(text.contains("\"a (in)\""));
    }
}
