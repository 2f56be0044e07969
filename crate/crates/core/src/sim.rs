// SPDX-License-Identifier: Apache-2.0

//! Seeded execution of a compiled automaton against scripted rounds of
//! boundary offers and readiness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{sat_assignments, ConstraintAtom, ConstraintAutomaton, DataAssignment, Name, StateId};
use crate::circuit::DataItem;

/// What the environment does with boundary-out ports a round does not list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    /// Only listed ports are ready.
    #[default]
    Closed,
    /// Every boundary-out port is ready in every round.
    AllReady,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnvRound {
    pub offers: BTreeMap<String, DataItem>,
    pub ready: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnvScript {
    /// Circuit the script was checked against; copied into traces.
    pub circuit: String,
    pub rounds: Vec<EnvRound>,
    pub policy: Policy,
    /// Boundary-out ports, needed by [`Policy::AllReady`].
    pub outputs: BTreeSet<String>,
}

impl EnvScript {
    /// Ready set of round `i` (0-based) after applying the policy.
    pub fn ready(&self, i: usize) -> BTreeSet<String> {
        let mut r = self.rounds[i].ready.clone();
        if self.policy == Policy::AllReady {
            r.extend(self.outputs.iter().cloned());
        }
        r
    }

    pub fn ports(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.outputs.iter().map(String::as_str).collect();
        for r in &self.rounds {
            out.extend(r.offers.keys().map(String::as_str));
            out.extend(r.ready.iter().map(String::as_str));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub max_rounds: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { seed: 0, max_rounds: usize::MAX }
    }
}

/// A transition that may fire now, with the data it would carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enabled {
    pub transition: usize,
    pub sync: BTreeSet<Name>,
    pub assignment: DataAssignment,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub round: usize,
    pub sync: BTreeSet<Name>,
    pub assignment: DataAssignment,
    pub from: StateId,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Fired(Firing),
    Stall { round: usize, state: StateId },
}

/// Pairs that can fire at `state`: every name in the sync-set is either
/// offered (and the data agrees) or ready, and the constraint holds.
pub fn enabled(
    a: &ConstraintAutomaton,
    state: StateId,
    offers: &BTreeMap<String, DataItem>,
    ready: &BTreeSet<String>,
) -> Vec<Enabled> {
    let mut out = Vec::new();
    for (i, t) in a.transitions.iter().enumerate().filter(|(_, t)| t.from == state) {
        if !t.sync.iter().all(|n| offers.contains_key(n.as_str()) || ready.contains(n.as_str())) {
            continue;
        }
        let pinned = t
            .sync
            .iter()
            .filter_map(|n| offers.get(n.as_str()).map(|v| ConstraintAtom::Is(n.clone(), v.clone())));
        let g = t.constraint.and(&crate::automata::DataConstraint::from_atoms(pinned));
        for assignment in sat_assignments(&g, &t.sync, &a.alphabet) {
            out.push(Enabled { transition: i, sync: t.sync.clone(), assignment, to: t.to });
        }
    }
    out.sort_by(|x, y| (&x.sync, &x.assignment, x.to, x.transition).cmp(&(&y.sync, &y.assignment, y.to, y.transition)));
    out
}

/// Fires one uniformly chosen enabled pair, or stalls.
pub fn step(
    a: &ConstraintAutomaton,
    state: StateId,
    round: usize,
    offers: &BTreeMap<String, DataItem>,
    ready: &BTreeSet<String>,
    rng: &mut ChaCha8Rng,
) -> StepOutcome {
    let choices = enabled(a, state, offers, ready);
    if choices.is_empty() {
        return StepOutcome::Stall { round, state };
    }
    let i = rng.gen_range(0..choices.len());
    let pick = choices.into_iter().nth(i).expect("in range");
    StepOutcome::Fired(Firing { round, sync: pick.sync, assignment: pick.assignment, from: state, to: pick.to })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("environment mentions `{0}`, which is not a boundary port of the automaton")]
    UnknownPort(String),
}

/// One round of a trace as stored in JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub kind: RoundKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sync: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<StateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<StateId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    Firing,
    Stall,
}

impl RoundRecord {
    fn from_outcome(o: &StepOutcome) -> Self {
        match o {
            StepOutcome::Fired(f) => RoundRecord {
                round: f.round,
                kind: RoundKind::Firing,
                sync: Some(f.sync.iter().map(|n| n.to_string()).collect()),
                data: Some(f.assignment.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()),
                from: Some(f.from),
                to: Some(f.to),
            },
            StepOutcome::Stall { round, .. } => {
                RoundRecord { round: *round, kind: RoundKind::Stall, sync: None, data: None, from: None, to: None }
            }
        }
    }

    pub fn is_firing(&self) -> bool {
        self.kind == RoundKind::Firing
    }

    /// Whether `port` took part in this round.
    pub fn fired(&self, port: &str) -> bool {
        self.sync.as_ref().is_some_and(|s| s.iter().any(|p| p == port))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub circuit: String,
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
}

impl Trace {
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("trace serialises");
        serde_json::to_string_pretty(&v).expect("value serialises") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Trace, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn firings(&self) -> impl Iterator<Item = &RoundRecord> {
        self.rounds.iter().filter(|r| r.is_firing())
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rounds {
            match (&r.sync, &r.data) {
                (Some(sync), Some(data)) => {
                    let items: Vec<String> = sync
                        .iter()
                        .map(|p| match data.get(p) {
                            Some(v) => format!("{p}={v}"),
                            None => p.clone(),
                        })
                        .collect();
                    writeln!(f, "round {}: {{{}}} {} -> {}", r.round, items.join(","), r.from.unwrap_or(0), r.to.unwrap_or(0))?;
                }
                _ => writeln!(f, "round {}: stall", r.round)?,
            }
        }
        Ok(())
    }
}

/// Runs rounds `1..=min(len, max_rounds)` of `env`.
pub fn simulate(a: &ConstraintAutomaton, env: &EnvScript, cfg: SimConfig) -> Result<Trace, SimError> {
    if let Some(p) = env.ports().into_iter().find(|p| !a.names.contains(&Name::from(*p))) {
        return Err(SimError::UnknownPort(p.to_owned()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = a.initial;
    let mut rounds = Vec::new();
    for i in 0..env.rounds.len().min(cfg.max_rounds) {
        let outcome = step(a, state, i + 1, &env.rounds[i].offers, &env.ready(i), &mut rng);
        if let StepOutcome::Fired(f) = &outcome {
            state = f.to;
        }
        rounds.push(RoundRecord::from_outcome(&outcome));
    }
    Ok(Trace { circuit: env.circuit.clone(), seed: cfg.seed, rounds })
}

/// Interactive stepping: offers and readiness accumulate until `fire`.
#[derive(Debug, Clone)]
pub struct Session {
    automaton: ConstraintAutomaton,
    state: StateId,
    round: usize,
    offers: BTreeMap<String, DataItem>,
    ready: BTreeSet<String>,
    rng: ChaCha8Rng,
}

impl Session {
    pub fn new(automaton: ConstraintAutomaton, seed: u64) -> Session {
        let state = automaton.initial;
        Session {
            automaton,
            state,
            round: 0,
            offers: BTreeMap::new(),
            ready: BTreeSet::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    /// Executes one command line. `None` means the session is over.
    pub fn command(&mut self, line: &str) -> Option<String> {
        let line = line.trim();
        let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        Some(match cmd {
            "" => String::new(),
            "quit" | "exit" => return None,
            "offer" => {
                let mut out = Vec::new();
                for part in rest.split([';', ',']).map(str::trim).filter(|s| !s.is_empty()) {
                    match part.split_once('=') {
                        Some((p, v)) if self.known(p.trim()) => {
                            self.offers.insert(p.trim().to_owned(), DataItem::from(v.trim()));
                        }
                        Some((p, _)) => out.push(format!("unknown port `{}`", p.trim())),
                        None => out.push(format!("expected port=data, got `{part}`")),
                    }
                }
                out.join("\n")
            }
            "ready" => {
                let mut out = Vec::new();
                for p in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    if self.known(p) {
                        self.ready.insert(p.to_owned());
                    } else {
                        out.push(format!("unknown port `{p}`"));
                    }
                }
                out.join("\n")
            }
            "state" => {
                let label = self.automaton.labels.get(self.state).cloned().unwrap_or_default();
                format!("state {} {label}", self.state)
            }
            "enabled" => {
                let list = enabled(&self.automaton, self.state, &self.offers, &self.ready);
                if list.is_empty() {
                    "nothing enabled".to_owned()
                } else {
                    list.iter().map(|e| format!("{} -> {}", describe(&e.sync, &e.assignment), e.to)).collect::<Vec<_>>().join("\n")
                }
            }
            "fire" => {
                self.round += 1;
                let outcome = step(&self.automaton, self.state, self.round, &self.offers, &self.ready, &mut self.rng);
                self.offers.clear();
                self.ready.clear();
                match outcome {
                    StepOutcome::Fired(f) => {
                        self.state = f.to;
                        format!("round {}: fired {} {} -> {}", f.round, describe(&f.sync, &f.assignment), f.from, f.to)
                    }
                    StepOutcome::Stall { round, state } => format!("round {round}: stall in state {state}"),
                }
            }
            other => format!("unknown command `{other}`; try offer, ready, fire, state, enabled, quit"),
        })
    }

    fn known(&self, port: &str) -> bool {
        self.automaton.names.contains(&Name::from(port))
    }
}

fn describe(sync: &BTreeSet<Name>, data: &DataAssignment) -> String {
    let items: Vec<String> = sync
        .iter()
        .map(|n| match data.get(n) {
            Some(v) => format!("{n}={v}"),
            None => n.to_string(),
        })
        .collect();
    format!("{{{}}}", items.join(","))
}
