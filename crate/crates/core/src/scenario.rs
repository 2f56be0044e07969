// SPDX-License-Identifier: Apache-2.0

//! The rescue dispatch example end to end: circuit, compliance rules, the
//! mapping from circuit firings to compliance events, and a driver that
//! runs the whole pipeline.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{analyze, AnalysisReport};
use crate::automata::{compile, AutomatonError, ConstraintAutomaton};
use crate::circuit::{Circuit, DataItem};
use crate::dsl::{parse_circuit, parse_env, parse_map, parse_rulebase, ParseErrors};
use crate::semlog::{Engine, EngineConfig, Event, EventOrigin, RuleBase, Term, Verdict};
use crate::sim::{simulate, EnvScript, SimConfig, SimError, Trace};

pub const RESCUE_CIRCUIT: &str = include_str!("../data/rescue.circuit");
pub const RESCUE_RULES: &str = include_str!("../data/rescue.rules");
pub const RESCUE_ENV: &str = include_str!("../data/rescue.env");
pub const RESCUE_ENV_POLICE_FIRST: &str = include_str!("../data/rescue_police_first.env");
pub const RESCUE_ENV_BAD_REQUEST: &str = include_str!("../data/rescue_bad_request.env");
pub const RESCUE_ENV_NO_POLICE: &str = include_str!("../data/rescue_no_police.env");
pub const RESCUE_MAP: &str = include_str!("../data/rescue.map");
pub const SEQUENCER3_CIRCUIT: &str = include_str!("../data/sequencer3.circuit");
pub const BLOCKER_CIRCUIT: &str = include_str!("../data/blocker.circuit");

/// `(port, data) -> atom` associations. A port-only entry applies to any
/// data the specific entries do not cover.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventMap {
    entries: BTreeMap<(String, Option<DataItem>), String>,
}

impl EventMap {
    pub fn insert(&mut self, port: &str, data: Option<DataItem>, atom: &str) {
        self.entries.insert((port.to_owned(), data), atom.to_owned());
    }

    pub fn lookup(&self, port: &str, data: &DataItem) -> Option<&str> {
        self.entries
            .get(&(port.to_owned(), Some(data.clone())))
            .or_else(|| self.entries.get(&(port.to_owned(), None)))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, Option<&DataItem>, &str)> {
        self.entries.iter().map(|((p, d), a)| (p.as_str(), d.as_ref(), a.as_str()))
    }
}

pub fn builtin_circuit() -> Circuit {
    parse_circuit(RESCUE_CIRCUIT).expect("shipped circuit parses")
}

pub fn builtin_rules() -> RuleBase {
    parse_rulebase(RESCUE_RULES).expect("shipped rules parse")
}

pub fn builtin_map() -> EventMap {
    parse_map(RESCUE_MAP, Some(&builtin_circuit())).expect("shipped map parses")
}

/// The canned twelve-round environment.
pub fn builtin_env() -> EnvScript {
    parse_env(RESCUE_ENV, Some(&builtin_circuit())).expect("shipped env parses")
}

pub fn sequencer3_circuit() -> Circuit {
    parse_circuit(SEQUENCER3_CIRCUIT).expect("shipped circuit parses")
}

/// Compiled rescue circuit, built once per process.
pub fn rescue_automaton() -> &'static ConstraintAutomaton {
    static CELL: OnceLock<ConstraintAutomaton> = OnceLock::new();
    CELL.get_or_init(|| compile(&builtin_circuit()).expect("shipped circuit compiles"))
}

/// One event per mapped boundary port per firing, in round order; ports
/// within a round in name order.
pub fn map_trace(trace: &Trace, map: &EventMap) -> Vec<Event> {
    let mut out = Vec::new();
    for r in trace.firings() {
        let (Some(sync), Some(data)) = (&r.sync, &r.data) else { continue };
        for port in sync {
            let Some(item) = data.get(port) else { continue };
            if let Some(atom) = map.lookup(port, &DataItem::from(item.as_str())) {
                out.push(Event { index: out.len() + 1, term: Term::atom(atom), origin: EventOrigin::TraceMapped });
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Parse(#[from] ParseErrors),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Inputs of a rescue run. Unset fields fall back to the shipped files.
#[derive(Debug, Clone, Default)]
pub struct ScenarioInput {
    pub seed: u64,
    pub rounds: Option<usize>,
    pub env: Option<EnvScript>,
    pub map: Option<EventMap>,
    /// Script events ingested after the mapped trace events.
    pub extra_events: Vec<Term>,
    pub engine: EngineConfig,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub trace: Trace,
    pub events: Vec<Event>,
    pub verdict: Verdict,
    pub analysis: AnalysisReport,
}

impl ScenarioReport {
    /// Indices of the `caseN` ports in firing order.
    pub fn dispatch_order(&self) -> Vec<usize> {
        self.trace
            .firings()
            .flat_map(|r| r.sync.iter().flatten())
            .filter_map(|p| p.strip_prefix("case").and_then(|n| n.parse().ok()))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "trace": serde_json::to_value(&self.trace).expect("trace serialises"),
            "events": self.events.iter().map(|e| json!({
                "index": e.index,
                "term": e.term.to_string(),
                "origin": e.origin,
            })).collect::<Vec<_>>(),
            "verdict": self.verdict.to_json(),
            "analysis": {
                "reachable": self.analysis.reachable,
                "transitions": self.analysis.transitions,
                "deadlocks": self.analysis.deadlocks.iter().map(|s| s.index).collect::<Vec<_>>(),
            },
        })
    }
}

/// Compile, simulate, map the trace to events, run the compliance engine.
pub fn run_rescue(input: &ScenarioInput) -> Result<ScenarioReport, ScenarioError> {
    let automaton = rescue_automaton();
    let env = match &input.env {
        Some(e) => e.clone(),
        None => builtin_env(),
    };
    let map = match &input.map {
        Some(m) => m.clone(),
        None => builtin_map(),
    };
    let cfg = SimConfig { seed: input.seed, max_rounds: input.rounds.unwrap_or(usize::MAX) };
    let mut trace = simulate(automaton, &env, cfg)?;
    if trace.circuit.is_empty() {
        trace.circuit = "rescue".to_owned();
    }
    let events = map_trace(&trace, &map);

    let mut engine = Engine::new(builtin_rules(), input.engine);
    for e in &events {
        engine.ingest(e.term.clone(), EventOrigin::TraceMapped);
    }
    for t in &input.extra_events {
        engine.ingest(t.clone(), EventOrigin::Script);
    }
    engine.saturate();
    Ok(ScenarioReport { trace, events, verdict: engine.verdict(), analysis: analyze(automaton) })
}
