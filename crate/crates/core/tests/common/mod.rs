// SPDX-License-Identifier: Apache-2.0

//! Shared generators and reference checkers for the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reoflow_core::automata::{ConstraintAtom, ConstraintAutomaton, DataConstraint, Name, Transition};
use reoflow_core::circuit::{validate_circuit, ChannelKind, Circuit, DataItem, PortId};
use reoflow_core::semlog::Term;
use reoflow_core::sim::{EnvRound, EnvScript, Policy};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn items(names: &[&str]) -> BTreeSet<DataItem> {
    names.iter().map(|s| DataItem::from(*s)).collect()
}

fn random_kind(r: &mut ChaCha8Rng, alphabet: &[DataItem]) -> ChannelKind {
    match r.gen_range(0..7) {
        0 => ChannelKind::Sync,
        1 => ChannelKind::LossySync,
        2 => ChannelKind::Fifo1 { init: r.gen_bool(0.3).then(|| alphabet.choose(r).unwrap().clone()) },
        3 => ChannelKind::SyncDrain,
        4 => ChannelKind::AsyncDrain,
        5 => {
            let mut accept: BTreeSet<DataItem> = alphabet.iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
            if accept.is_empty() {
                accept.insert(alphabet[0].clone());
            }
            ChannelKind::Filter { accept }
        }
        _ => ChannelKind::Transform {
            map: alphabet.iter().map(|v| (v.clone(), alphabet.choose(r).unwrap().clone())).collect(),
        },
    }
}

/// A validated circuit with 1 to `max_channels` channels over up to six
/// nodes. Nodes with only outgoing ends may become boundary inputs, nodes
/// with only incoming ends boundary outputs.
pub fn random_circuit(seed: u64, max_channels: usize) -> Circuit {
    let mut r = rng(seed);
    loop {
        let pool = ["ok", "bad", "tick"];
        let size = r.gen_range(1..=pool.len());
        let alphabet: Vec<DataItem> = pool[..size].iter().map(|s| DataItem::from(*s)).collect();
        let mut c = Circuit::new(format!("g{seed}"), alphabet.iter().cloned());
        let nodes = ["n0", "n1", "n2", "n3", "n4", "n5"];
        for _ in 0..r.gen_range(1..=max_channels) {
            let a = *nodes.choose(&mut r).unwrap();
            let b = loop {
                let b = *nodes.choose(&mut r).unwrap();
                if b != a {
                    break b;
                }
            };
            let kind = random_kind(&mut r, &alphabet);
            c.add_channel(kind, a, b);
        }
        for (name, node) in c.nodes() {
            if node.incoming.is_empty() && r.gen_bool(0.7) {
                c.ports.insert(PortId::input(name));
            } else if node.outgoing.is_empty() && r.gen_bool(0.7) {
                c.ports.insert(PortId::output(name));
            }
        }
        if validate_circuit(&c).is_ok() {
            return c;
        }
    }
}

/// Small automaton for algebraic checks: up to `max_states` states, names
/// drawn from `pool` (at most two per automaton), alphabet {ok, bad}.
pub fn random_automaton(r: &mut ChaCha8Rng, max_states: usize, pool: &[&str]) -> ConstraintAutomaton {
    let alphabet = items(&["ok", "bad"]);
    let alpha: Vec<DataItem> = alphabet.iter().cloned().collect();
    let mut names: Vec<&str> = pool.to_vec();
    names.shuffle(r);
    names.truncate(r.gen_range(1..=2.min(pool.len())));
    let names: Vec<Name> = names.into_iter().map(Name::from).collect();
    let states = r.gen_range(1..=max_states);
    let mut transitions = Vec::new();
    for _ in 0..r.gen_range(0..=4) {
        let mut sync: BTreeSet<Name> = names.iter().filter(|_| r.gen_bool(0.6)).cloned().collect();
        if sync.is_empty() {
            sync.insert(names.choose(r).unwrap().clone());
        }
        let in_sync: Vec<Name> = sync.iter().cloned().collect();
        let constraint = match r.gen_range(0..4) {
            0 => DataConstraint::truth(),
            1 => DataConstraint::from_atoms([ConstraintAtom::Is(in_sync.choose(r).unwrap().clone(), alpha.choose(r).unwrap().clone())]),
            2 if in_sync.len() == 2 => DataConstraint::same(&in_sync[0], &in_sync[1]),
            _ => DataConstraint::from_atoms([ConstraintAtom::In(
                in_sync.choose(r).unwrap().clone(),
                [alpha.choose(r).unwrap().clone()].into_iter().collect(),
            )]),
        };
        transitions.push(Transition { from: r.gen_range(0..states), sync, constraint, to: r.gen_range(0..states) });
    }
    transitions.sort();
    transitions.dedup();
    ConstraintAutomaton {
        names: names.into_iter().collect(),
        labels: (0..states).map(|i| format!("q{i}")).collect(),
        initial: 0,
        transitions,
        alphabet,
    }
}

/// Brute-force evaluation of a constraint on an assignment.
pub fn holds(g: &DataConstraint, asg: &BTreeMap<Name, DataItem>) -> bool {
    g.atoms().iter().all(|atom| match atom {
        ConstraintAtom::Same(x, y) => asg.get(x) == asg.get(y),
        ConstraintAtom::Is(x, v) => asg.get(x) == Some(v),
        ConstraintAtom::In(x, s) => asg.get(x).is_some_and(|v| s.contains(v)),
    })
}

/// All assignments of `alphabet` to `sync`, by enumeration.
pub fn all_assignments(sync: &BTreeSet<Name>, alphabet: &BTreeSet<DataItem>) -> Vec<BTreeMap<Name, DataItem>> {
    let mut out = vec![BTreeMap::new()];
    for n in sync {
        out = out
            .into_iter()
            .flat_map(|m| {
                alphabet.iter().map(move |v| {
                    let mut m = m.clone();
                    m.insert(n.clone(), v.clone());
                    m
                })
            })
            .collect();
    }
    out
}

/// Expanded edge set `(from, assignment, to)` by enumeration.
pub type Expanded = BTreeSet<(usize, BTreeMap<Name, DataItem>, usize)>;

pub fn expand(a: &ConstraintAutomaton) -> Expanded {
    let mut out = BTreeSet::new();
    for t in &a.transitions {
        for asg in all_assignments(&t.sync, &a.alphabet) {
            if holds(&t.constraint, &asg) {
                out.insert((t.from, asg, t.to));
            }
        }
    }
    out
}

/// A busy environment for the rescue circuit: every input is offered and
/// every output is ready in every round, so several transitions compete.
pub fn busy_rescue_env(seed: u64, rounds: usize) -> EnvScript {
    let mut r = rng(seed ^ 0x5eed);
    let outputs: BTreeSet<String> =
        ["case1", "case2", "case3", "emergency_alarm", "police_alarm", "fire_alarm"].iter().map(|s| s.to_string()).collect();
    let mut env = EnvScript { circuit: "rescue".into(), rounds: Vec::new(), policy: Policy::AllReady, outputs };
    for _ in 0..rounds {
        let mut offers = BTreeMap::new();
        let req = if r.gen_bool(0.75) { "ok" } else { "bad" };
        offers.insert(if r.gen_bool(0.5) { "citizens" } else { "sensors" }.to_owned(), DataItem::from(req));
        for p in ["act1", "act2", "act3", "ps_enable", "fs_enable"] {
            if r.gen_bool(0.6) {
                offers.insert(p.to_owned(), DataItem::from("ok"));
            }
        }
        env.rounds.push(EnvRound { offers, ready: BTreeSet::new() });
    }
    env
}

pub const SCENARIO_ATOMS: [&str; 5] = ["AmbulanceRequest", "FireRequest", "PoliceRequest", "HelicopterMission", "BudgetConsuming"];

/// Event stream of length `0..=max_len` over the five scenario atoms.
pub fn random_stream(seed: u64, max_len: usize) -> Vec<Term> {
    let mut r = rng(seed);
    let len = r.gen_range(0..=max_len);
    (0..len).map(|_| Term::atom(SCENARIO_ATOMS.choose(&mut r).unwrap())).collect()
}
