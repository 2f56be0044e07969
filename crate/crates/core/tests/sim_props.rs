// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use reoflow_core::automata::{compile, ConstraintAutomaton, Name};
use reoflow_core::circuit::{DataItem, PortKind};
use reoflow_core::dsl::{parse_circuit, parse_env};
use reoflow_core::scenario::{builtin_circuit, rescue_automaton, sequencer3_circuit, RESCUE_ENV_BAD_REQUEST};
use reoflow_core::sim::{enabled, simulate, step, EnvRound, EnvScript, Policy, Session, SimConfig, StepOutcome, Trace};

use common::{busy_rescue_env, rng};

const MERGER: &str = "circuit merger {
  data { ok }
  ports { in a; in b; out c; }
  sync(a, M);
  sync(b, M);
  sync(M, c);
}";

fn merger() -> ConstraintAutomaton {
    compile(&parse_circuit(MERGER).unwrap()).unwrap()
}

fn offer(pairs: &[(&str, &str)]) -> BTreeMap<String, DataItem> {
    pairs.iter().map(|(p, v)| (p.to_string(), DataItem::from(*v))).collect()
}

fn names(list: &[&str]) -> BTreeSet<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn cfg(seed: u64) -> SimConfig {
    SimConfig { seed, ..Default::default() }
}

/// Replays `trace` against the automaton and the script it came from.
fn check_sound(a: &ConstraintAutomaton, env: &EnvScript, trace: &Trace) {
    let mut state = a.initial;
    for (i, r) in trace.rounds.iter().enumerate() {
        assert_eq!(r.round, i + 1);
        let options = enabled(a, state, &env.rounds[i].offers, &env.ready(i));
        if r.is_firing() {
            assert_eq!(r.from, Some(state));
            let sync: BTreeSet<Name> = r.sync.as_ref().unwrap().iter().map(|s| Name::from(s.as_str())).collect();
            let data: BTreeMap<Name, DataItem> = r
                .data
                .as_ref()
                .unwrap()
                .iter()
                .map(|(k, v)| (Name::from(k.as_str()), DataItem::from(v.as_str())))
                .collect();
            assert!(
                options.iter().any(|e| e.sync == sync && e.assignment == data && Some(e.to) == r.to),
                "round {} fired something not enabled",
                r.round
            );
            state = r.to.unwrap();
        } else {
            assert!(options.is_empty(), "round {} stalled with {} options", r.round, options.len());
        }
    }
}

#[test]
fn same_seed_same_trace() {
    let circuits = [builtin_circuit(), sequencer3_circuit()];
    for (k, c) in circuits.iter().enumerate() {
        let a = compile(c).unwrap();
        for seed in 0..20 {
            let env = if k == 0 {
                busy_rescue_env(seed, 30)
            } else {
                let mut r = rng(seed);
                let mut env = EnvScript { circuit: c.name.clone(), rounds: Vec::new(), policy: Policy::Closed, outputs: BTreeSet::new() };
                for _ in 0..30 {
                    let offers = ["s1", "s2", "s3"]
                        .iter()
                        .filter(|_| rand::Rng::gen_bool(&mut r, 0.6))
                        .map(|p| (p.to_string(), DataItem::from("tick")))
                        .collect();
                    env.rounds.push(EnvRound { offers, ready: BTreeSet::new() });
                }
                env
            };
            let one = simulate(&a, &env, cfg(seed)).unwrap();
            let two = simulate(&a, &env, cfg(seed)).unwrap();
            assert_eq!(one.to_json(), two.to_json());
            check_sound(&a, &env, &one);
        }
    }
}

#[test]
fn random_circuits_simulate_soundly() {
    for seed in 0..40 {
        let c = common::random_circuit(seed, 5);
        let a = compile(&c).unwrap();
        let mut r = rng(seed);
        let alphabet: Vec<DataItem> = c.alphabet.iter().cloned().collect();
        let outputs: BTreeSet<String> = c.ports.iter().filter(|p| p.kind == PortKind::BoundaryOut).map(|p| p.name.clone()).collect();
        let mut env = EnvScript { circuit: c.name.clone(), rounds: Vec::new(), policy: Policy::AllReady, outputs };
        for _ in 0..15 {
            let mut offers = BTreeMap::new();
            for p in c.ports.iter().filter(|p| p.kind == PortKind::BoundaryIn) {
                if rand::Rng::gen_bool(&mut r, 0.7) {
                    offers.insert(p.name.clone(), alphabet[rand::Rng::gen_range(&mut r, 0..alphabet.len())].clone());
                }
            }
            env.rounds.push(EnvRound { offers, ready: BTreeSet::new() });
        }
        let t = simulate(&a, &env, cfg(seed)).unwrap();
        assert_eq!(t.rounds.len(), 15);
        check_sound(&a, &env, &t);
    }
}

#[test]
fn merger_is_fair() {
    let a = merger();
    let offers = offer(&[("a", "ok"), ("b", "ok")]);
    let ready = names(&["c"]);
    assert_eq!(enabled(&a, a.initial, &offers, &ready).len(), 2);
    let mut from_a = 0;
    for seed in 0..100 {
        match step(&a, a.initial, 1, &offers, &ready, &mut rng(seed)) {
            StepOutcome::Fired(f) => {
                if f.sync.contains(&Name::from("a")) {
                    from_a += 1;
                }
            }
            StepOutcome::Stall { .. } => panic!("merger stalled"),
        }
    }
    let share = from_a as f64 / 100.0;
    assert!((share - 0.5).abs() <= 0.15, "side a chosen {from_a} times of 100");
}

#[test]
fn single_option_ignores_seed() {
    let a = merger();
    let offers = offer(&[("a", "ok")]);
    let ready = names(&["c"]);
    let only = enabled(&a, a.initial, &offers, &ready);
    assert_eq!(only.len(), 1);
    for seed in 0..20 {
        let StepOutcome::Fired(f) = step(&a, a.initial, 1, &offers, &ready, &mut rng(seed)) else { panic!("stalled") };
        assert_eq!(f.sync, only[0].sync);
    }
}

#[test]
fn nothing_ready_means_stall() {
    let a = merger();
    let offers = offer(&[("a", "ok")]);
    assert!(enabled(&a, a.initial, &offers, &BTreeSet::new()).is_empty());
    assert!(matches!(step(&a, a.initial, 3, &offers, &BTreeSet::new(), &mut rng(0)), StepOutcome::Stall { round: 3, .. }));
}

#[test]
fn rejected_request_is_dropped_not_dispatched() {
    let a = rescue_automaton();
    let offers = offer(&[("citizens", "bad")]);
    let ready = names(&["case1", "case2", "case3", "emergency_alarm", "police_alarm", "fire_alarm"]);
    let options = enabled(a, a.initial, &offers, &ready);
    assert!(options.iter().any(|e| e.sync == BTreeSet::from([Name::from("citizens")])));
    assert!(options.iter().all(|e| !e.sync.iter().any(|n| n.starts_with("case"))));
}

#[test]
fn bad_request_script_dispatches_twice() {
    let c = builtin_circuit();
    let env = parse_env(RESCUE_ENV_BAD_REQUEST, Some(&c)).unwrap();
    let t = simulate(rescue_automaton(), &env, cfg(3)).unwrap();
    let cases: Vec<&str> = t
        .firings()
        .flat_map(|r| r.sync.as_ref().unwrap().iter().filter(|p| p.starts_with("case")).map(|p| p.as_str()))
        .collect();
    assert_eq!(cases, ["case1", "case2"]);
}

#[test]
fn unknown_port_is_refused() {
    let a = merger();
    let env = EnvScript {
        circuit: "merger".into(),
        rounds: vec![EnvRound { offers: offer(&[("z", "ok")]), ready: BTreeSet::new() }],
        policy: Policy::Closed,
        outputs: BTreeSet::new(),
    };
    assert!(simulate(&a, &env, cfg(0)).is_err());
}

#[test]
fn round_limit_truncates() {
    let env = busy_rescue_env(1, 10);
    let t = simulate(rescue_automaton(), &env, SimConfig { seed: 1, max_rounds: 4 }).unwrap();
    assert_eq!(t.rounds.len(), 4);
    let none = simulate(rescue_automaton(), &env, SimConfig { seed: 1, max_rounds: 0 }).unwrap();
    assert!(none.rounds.is_empty());
}

#[test]
fn session_fires_and_stalls() {
    let mut s = Session::new(merger(), 5);
    assert!(s.command("fire").unwrap().contains("stall"));
    s.command("offer a=ok").unwrap();
    s.command("ready c").unwrap();
    let fired = s.command("fire").unwrap();
    assert!(fired.contains('a') && fired.contains('c'), "{fired}");
    assert!(s.command("quit").is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trace_json_round_trips(seed in any::<u64>()) {
        let env = busy_rescue_env(seed, 20);
        let t = simulate(rescue_automaton(), &env, cfg(seed)).unwrap();
        let back = Trace::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_json(), t.to_json());
    }
}
