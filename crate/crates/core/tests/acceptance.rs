// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use reoflow_core::analysis::{bisimilar, same_traces_upto, traces_upto, TraceWord};
use reoflow_core::automata::{
    ca_of_channel, compile, component_automata, hide, join, join_all, ConstraintAutomaton, Name,
};
use reoflow_core::circuit::{Channel, ChannelKind, DataItem};
use reoflow_core::dsl::{parse_circuit, parse_env, print_circuit};
use reoflow_core::scenario::{
    builtin_circuit, builtin_rules, rescue_automaton, sequencer3_circuit, RESCUE_ENV, RESCUE_ENV_BAD_REQUEST,
    RESCUE_ENV_NO_POLICE, RESCUE_ENV_POLICE_FIRST,
};
use reoflow_core::semlog::{check_sequence, Engine, EngineConfig, Event, EventOrigin, Modality, ProtocolOrder, Term};
use reoflow_core::sim::{simulate, EnvScript, SimConfig, Trace};

use common::{busy_rescue_env, expand, random_automaton, random_circuit, random_stream, rng};

/// Random automaton triples for the product laws.
const PRODUCT_TRIPLES: usize = 50;
const PRODUCT_MAX_STATES: usize = 3;
/// Random circuits and trace depth for the hiding check.
const HIDING_CIRCUITS: usize = 20;
const HIDING_DEPTH: usize = 6;
const SEQUENCER_MAX_DEPTH: usize = 9;
const RESCUE_SEEDS: u64 = 50;
const BUSY_ROUNDS: usize = 40;
const DETERMINISM_SEEDS: u64 = 20;
const ROUND_TRIP_CIRCUITS: u64 = 200;
const CONVERGENCE_STREAMS: u64 = 200;
const STREAM_MAX_LEN: usize = 20;
const MAX_DEPTH: usize = 8;
const MAX_ITERATIONS: usize = 10_000;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---- 1: channel semantics against hand-written automata

type Edge = (String, Vec<(&'static str, &'static str)>, String);

fn expected_channel(kind: &str) -> (Vec<&'static str>, &'static str, Vec<Edge>) {
    let e = |from: &str, data: &[(&'static str, &'static str)], to: &str| (from.to_owned(), data.to_vec(), to.to_owned());
    let vals = ["bad", "ok"];
    let mut edges = Vec::new();
    match kind {
        "sync" => vals.iter().for_each(|v| edges.push(e("c1", &[("a", v), ("b", v)], "c1"))),
        "lossysync" => vals.iter().for_each(|v| {
            edges.push(e("c1", &[("a", v), ("b", v)], "c1"));
            edges.push(e("c1", &[("a", v)], "c1"));
        }),
        "syncdrain" => {
            for v in vals {
                for w in vals {
                    edges.push(e("c1", &[("a", v), ("b", w)], "c1"));
                }
            }
        }
        "asyncdrain" => vals.iter().for_each(|v| {
            edges.push(e("c1", &[("a", v)], "c1"));
            edges.push(e("c1", &[("b", v)], "c1"));
        }),
        "filter" => {
            edges.push(e("c1", &[("a", "ok"), ("b", "ok")], "c1"));
            edges.push(e("c1", &[("a", "bad")], "c1"));
        }
        "transform" => {
            edges.push(e("c1", &[("a", "ok"), ("b", "bad")], "c1"));
            edges.push(e("c1", &[("a", "bad"), ("b", "ok")], "c1"));
        }
        "fifo1" => {
            for v in vals {
                let full: &'static str = if v == "ok" { "c1:full(ok)" } else { "c1:full(bad)" };
                edges.push(e("c1:empty", &[("a", v)], full));
                edges.push(e(full, &[("b", v)], "c1:empty"));
            }
            return (vec!["c1:empty", "c1:full(bad)", "c1:full(ok)"], "c1:empty", edges);
        }
        _ => unreachable!(),
    }
    (vec!["c1"], "c1", edges)
}

fn observed_channel(a: &ConstraintAutomaton) -> (Vec<String>, String, BTreeSet<Edge>) {
    let short = |n: &Name| if n.ends_with(".a") { "a" } else { "b" };
    let value = |v: &DataItem| if v.as_str() == "ok" { "ok" } else { "bad" };
    let edges = expand(a)
        .into_iter()
        .map(|(f, asg, t)| {
            let data = asg.iter().map(|(n, v)| (short(n), value(v))).collect();
            (a.labels[f].clone(), data, a.labels[t].clone())
        })
        .collect();
    let mut labels = a.labels.clone();
    labels.sort();
    (labels, a.labels[a.initial].clone(), edges)
}

fn criterion_1() -> Check {
    let alphabet = common::items(&["ok", "bad"]);
    let kinds = [
        ("sync", ChannelKind::Sync),
        ("lossysync", ChannelKind::LossySync),
        ("fifo1", ChannelKind::Fifo1 { init: None }),
        ("syncdrain", ChannelKind::SyncDrain),
        ("asyncdrain", ChannelKind::AsyncDrain),
        ("filter", ChannelKind::Filter { accept: common::items(&["ok"]) }),
        (
            "transform",
            ChannelKind::Transform {
                map: [("ok".into(), "bad".into()), ("bad".into(), "ok".into())].into_iter().collect(),
            },
        ),
    ];
    for (name, kind) in kinds {
        let ca = ca_of_channel(&Channel::new("c1", kind, "x", "y"), &alphabet);
        let (labels, initial, edges) = observed_channel(&ca);
        let (want_labels, want_initial, want_edges) = expected_channel(name);
        let want_edges: BTreeSet<Edge> = want_edges.into_iter().collect();
        ensure(labels == want_labels, || format!("{name}: states {labels:?}, expected {want_labels:?}"))?;
        ensure(initial == want_initial, || format!("{name}: initial {initial}, expected {want_initial}"))?;
        ensure(edges == want_edges, || format!("{name}: transitions {edges:?}, expected {want_edges:?}"))?;
    }
    let ca = ca_of_channel(&Channel::new("c1", ChannelKind::Fifo1 { init: Some("ok".into()) }, "x", "y"), &alphabet);
    ensure(ca.labels[ca.initial] == "c1:full(ok)", || "fifo1 with init=ok does not start full(ok)".into())?;
    Ok("7 kinds match".into())
}

// ---- 2: product algebra

fn bisim(a: &ConstraintAutomaton, b: &ConstraintAutomaton) -> Result<bool, String> {
    bisimilar(a, b).map_err(|e| e.to_string())
}

fn criterion_2() -> Check {
    let pool = ["p", "q", "r"];
    let mut r = rng(2);
    for i in 0..PRODUCT_TRIPLES {
        let a = random_automaton(&mut r, PRODUCT_MAX_STATES, &pool);
        let b = random_automaton(&mut r, PRODUCT_MAX_STATES, &pool);
        let c = random_automaton(&mut r, PRODUCT_MAX_STATES, &pool);
        ensure(bisim(&join(&a, &b), &join(&b, &a))?, || format!("triple {i}: join not commutative"))?;
        ensure(bisim(&join(&join(&a, &b), &c), &join(&a, &join(&b, &c)))?, || format!("triple {i}: join not associative"))?;
        ensure(bisim(&join(&ConstraintAutomaton::identity(), &a), &a)?, || format!("triple {i}: identity not neutral"))?;
    }
    Ok(format!("{PRODUCT_TRIPLES} triples"))
}

// ---- 3: hiding

fn sync_named(a: &str, b: &str, alphabet: &BTreeSet<DataItem>) -> ConstraintAutomaton {
    let (a, b) = (a.to_owned(), b.to_owned());
    ca_of_channel(&Channel::new("c", ChannelKind::Sync, "x", "y"), alphabet)
        .renamed(move |n| if n.ends_with(".a") { a.clone() } else { b.clone() })
}

fn criterion_3() -> Check {
    let mut observable = 0;
    for seed in 0..HIDING_CIRCUITS as u64 {
        let c = random_circuit(1000 + seed, 5);
        let raw = join_all(&component_automata(&c).map_err(|e| e.to_string())?);
        let hidden = compile(&c).map_err(|e| e.to_string())?;
        let visible: BTreeSet<Name> = hidden.names.clone();
        ensure(same_traces_upto(&raw, &hidden, &visible, HIDING_DEPTH), || {
            format!("circuit {seed} changes its boundary traces when hidden:\n{}", print_circuit(&c))
        })?;
        if traces_upto(&hidden, 2).len() > 1 {
            observable += 1;
        }
    }
    ensure(observable * 2 >= HIDING_CIRCUITS, || format!("only {observable} circuits have visible behaviour"))?;
    let alphabet = common::items(&["ok", "bad"]);
    let chain = join(&sync_named("a", "b", &alphabet), &sync_named("b", "c", &alphabet));
    let hidden = hide(&chain, &[Name::from("b")].into()).map_err(|e| e.to_string())?;
    ensure(bisim(&hidden, &sync_named("a", "c", &alphabet))?, || "hide{b}(Sync;Sync) is not Sync".into())?;
    Ok(format!("{HIDING_CIRCUITS} circuits at depth {HIDING_DEPTH}, {observable} with visible steps"))
}

// ---- 4: sequencer

fn criterion_4() -> Check {
    let a = compile(&sequencer3_circuit()).map_err(|e| e.to_string())?;
    let step = |p: &str| -> BTreeMap<Name, DataItem> { [(Name::from(p), DataItem::from("tick"))].into() };
    for k in 1..=SEQUENCER_MAX_DEPTH {
        let mut want = BTreeSet::new();
        for len in 0..=k {
            want.insert(TraceWord((0..len).map(|i| step(["s1", "s2", "s3"][i % 3])).collect()));
        }
        let got = traces_upto(&a, k);
        ensure(got == want, || format!("depth {k}: {} traces, expected {}", got.len(), want.len()))?;
    }
    Ok(format!("s1 s2 s3 cycle at depths 1..={SEQUENCER_MAX_DEPTH}"))
}

// ---- 5: rescue behaviour

fn approved(r: &reoflow_core::sim::RoundRecord) -> bool {
    let data = r.data.as_ref();
    ["citizens", "sensors"].iter().any(|p| r.fired(p) && data.and_then(|d| d.get(*p)).map(String::as_str) == Some("ok"))
}

fn cases(r: &reoflow_core::sim::RoundRecord) -> Vec<usize> {
    (1..=3).filter(|i| r.fired(&format!("case{i}"))).collect()
}

/// Checks every rescue property that holds for any run.
fn rescue_laws(trace: &Trace, env: &EnvScript) -> Result<(), String> {
    let mut dispatched = Vec::new();
    let (mut alarms, mut police, mut fire) = (0usize, 0usize, 0usize);
    for r in &trace.rounds {
        let i = r.round - 1;
        let cs = cases(r);
        if approved(r) {
            ensure(cs.len() == 1, || format!("round {}: approved request dispatched to {cs:?}", r.round))?;
        } else {
            ensure(cs.is_empty(), || format!("round {}: dispatch without an approved request", r.round))?;
        }
        dispatched.extend(cs);
        if r.fired("police_alarm") {
            ensure(env.rounds[i].offers.contains_key("ps_enable"), || format!("round {}: police alarm without ps_enable", r.round))?;
            ensure(alarms > police, || format!("round {}: police alarm with no pending notification", r.round))?;
            police += 1;
        }
        if r.fired("fire_alarm") {
            ensure(env.rounds[i].offers.contains_key("fs_enable"), || format!("round {}: fire alarm without fs_enable", r.round))?;
            ensure(alarms > fire, || format!("round {}: fire alarm with no pending notification", r.round))?;
            fire += 1;
        }
        if r.fired("emergency_alarm") {
            alarms += 1;
        }
        ensure(alarms - police <= 1 && alarms - fire <= 1, || format!("round {}: more than one pending notification", r.round))?;
    }
    let cycle: Vec<usize> = (0..dispatched.len()).map(|i| i % 3 + 1).collect();
    ensure(dispatched == cycle, || format!("dispatch order {dispatched:?}"))
}

fn first_round(trace: &Trace, port: &str) -> Option<usize> {
    trace.rounds.iter().find(|r| r.fired(port)).map(|r| r.round)
}

fn criterion_5() -> Check {
    let c = builtin_circuit();
    let a = rescue_automaton();
    let env = |text: &str| parse_env(text, Some(&c)).map_err(|e| e.to_string());
    let (canned, police_first, bad, no_police) =
        (env(RESCUE_ENV)?, env(RESCUE_ENV_POLICE_FIRST)?, env(RESCUE_ENV_BAD_REQUEST)?, env(RESCUE_ENV_NO_POLICE)?);
    for seed in 0..RESCUE_SEEDS {
        let cfg = SimConfig { seed, max_rounds: usize::MAX };
        let run = |e: &EnvScript| simulate(a, e, cfg).map_err(|e| e.to_string());

        let t = run(&canned)?;
        rescue_laws(&t, &canned)?;
        let order: Vec<usize> = t.rounds.iter().flat_map(cases).collect();
        ensure(order == [1, 2, 3], || format!("seed {seed}: canned dispatch {order:?}"))?;
        let (f, p) = (first_round(&t, "fire_alarm"), first_round(&t, "police_alarm"));
        ensure(f.is_some() && p.is_some() && f < p, || format!("seed {seed}: canned env should fire before police"))?;

        let t = run(&police_first)?;
        rescue_laws(&t, &police_first)?;
        let (f, p) = (first_round(&t, "fire_alarm"), first_round(&t, "police_alarm"));
        ensure(f.is_some() && p.is_some() && p < f, || format!("seed {seed}: second env should police before fire"))?;

        let t = run(&bad)?;
        rescue_laws(&t, &bad)?;
        let r2 = &t.rounds[1];
        ensure(r2.fired("citizens") && cases(r2).is_empty(), || format!("seed {seed}: bad request not dropped"))?;

        let t = run(&no_police)?;
        rescue_laws(&t, &no_police)?;
        ensure(first_round(&t, "police_alarm").is_none() && first_round(&t, "fire_alarm").is_some(), || {
            format!("seed {seed}: withheld ps_enable should block only the police alarm")
        })?;

        let busy = busy_rescue_env(seed, BUSY_ROUNDS);
        rescue_laws(&run(&busy)?, &busy).map_err(|e| format!("seed {seed}, busy env: {e}"))?;
    }
    Ok(format!("{RESCUE_SEEDS} seeds, 5 environments"))
}

// ---- 6: compliance chain

fn atom(s: &str) -> Term {
    Term::atom(s)
}

fn engine_with(events: &[Term]) -> Engine {
    let mut e = Engine::new(builtin_rules(), EngineConfig { max_depth: MAX_DEPTH, max_iterations: MAX_ITERATIONS });
    e.ingest_all(events.iter().cloned(), EventOrigin::Script);
    e.saturate();
    e
}

fn criterion_6() -> Check {
    let bc = atom("BudgetConsuming");
    let very_bc = Term::very(bc.clone());
    let warning = Term::op(Modality::Warning, Term::p(very_bc.clone()));
    let missions = vec![atom("HelicopterMission"); 3];

    let e = engine_with(&missions);
    for t in [Term::count(3, bc.clone()), Term::p(very_bc.clone()), warning.clone()] {
        ensure(e.contains(&t), || format!("3 missions: `{t}` missing"))?;
    }
    ensure(e.verdict().failures.is_empty(), || "3 missions: unexpected failure".into())?;

    let e = engine_with(&missions[..2]);
    ensure(e.verdict().warnings.is_empty(), || "2 missions: unexpected warning".into())?;

    let mut with_check = missions.clone();
    with_check.push(Term::op(Modality::DoubleCheck, Term::p(very_bc.clone())));
    let v = engine_with(&with_check).verdict();
    let resolved = Term::op(Modality::Resolved, warning.clone());
    ensure(v.resolved.iter().any(|i| i.fact == resolved), || format!("`{resolved}` missing"))?;
    ensure(v.warnings.iter().any(|i| i.fact == warning), || "resolved warning no longer listed".into())?;

    let mut with_very = missions.clone();
    with_very.push(very_bc.clone());
    let failure = Term::op(Modality::Failure, very_bc.clone());
    ensure(engine_with(&with_very).verdict().failures.iter().any(|i| i.fact == failure), || format!("`{failure}` missing"))?;

    let x = atom("x");
    let cases: [(&str, Vec<Term>, Term); 5] = [
        ("threshold", vec![Term::count(3, bc.clone())], Term::p(very_bc.clone())),
        (
            "forbidden permission",
            vec![Term::p(very_bc.clone())],
            warning.clone(),
        ),
        ("implication", vec![Term::p(atom("HelicopterMission"))], Term::p(bc.clone())),
        ("intensified permission", vec![Term::very(Term::p(x.clone()))], Term::p(Term::very(x.clone()))),
        ("nested permission", vec![Term::p(Term::p(x.clone()))], Term::p(x.clone())),
    ];
    for (label, facts, want) in cases {
        ensure(engine_with(&facts).contains(&want), || format!("{label}: `{want}` not derived"))?;
    }
    Ok("chain, threshold, resolution, failure and single-rule examples".into())
}

// ---- 7: order checking

fn criterion_7() -> Check {
    let order = builtin_rules().orders;
    let stream = |names: &[&str]| -> Vec<Event> {
        names.iter().enumerate().map(|(i, n)| Event { index: i + 1, term: atom(n), origin: EventOrigin::Script }).collect()
    };
    let ok = check_sequence(&stream(&["AmbulanceRequest", "FireRequest", "PoliceRequest"]), &order);
    ensure(ok.is_empty(), || format!("in-order stream reported {ok:?}"))?;
    let bad = check_sequence(&stream(&["PoliceRequest", "AmbulanceRequest", "FireRequest"]), &order);
    ensure(bad.len() == 1 && bad[0].index == 1 && bad[0].expected == ["AmbulanceRequest"], || format!("police-first: {bad:?}"))?;
    let empty: Vec<ProtocolOrder> = order.clone();
    ensure(check_sequence(&[], &empty).is_empty(), || "empty stream reported violations".into())?;
    Ok("in-order 0 violations, police-first 1 at index 1".into())
}

// ---- 8: determinism

fn facts_text(e: &Engine) -> String {
    e.facts().iter().map(|t| format!("{t}\n")).collect()
}

fn criterion_8() -> Check {
    let a = rescue_automaton();
    for seed in 0..DETERMINISM_SEEDS {
        let env = busy_rescue_env(seed, BUSY_ROUNDS);
        let cfg = SimConfig { seed, max_rounds: usize::MAX };
        let first = simulate(a, &env, cfg).map_err(|e| e.to_string())?.to_json();
        let second = simulate(a, &env, cfg).map_err(|e| e.to_string())?.to_json();
        ensure(first == second, || format!("seed {seed}: traces differ"))?;

        let stream = random_stream(seed, STREAM_MAX_LEN);
        ensure(facts_text(&engine_with(&stream)) == facts_text(&engine_with(&stream)), || format!("seed {seed}: saturation differs"))?;
    }
    for seed in 0..ROUND_TRIP_CIRCUITS {
        let c = random_circuit(seed, 8);
        let text = print_circuit(&c);
        let back = parse_circuit(&text).map_err(|e| format!("seed {seed}: {e}\n{text}"))?;
        ensure(c.isomorphic(&back), || format!("seed {seed}: round trip changed the circuit\n{text}"))?;
    }
    Ok(format!("{DETERMINISM_SEEDS} seeds, {ROUND_TRIP_CIRCUITS} round trips"))
}

// ---- 9: convergence

fn criterion_9() -> Check {
    let mut longest = 0;
    for seed in 0..CONVERGENCE_STREAMS {
        let stream = random_stream(10_000 + seed, STREAM_MAX_LEN);
        let mut e = Engine::new(builtin_rules(), EngineConfig { max_depth: MAX_DEPTH, max_iterations: MAX_ITERATIONS });
        e.ingest_all(stream.iter().cloned(), EventOrigin::Script);
        let out = e.saturate();
        ensure(out.converged, || format!("stream {seed} did not converge"))?;
        ensure(e.diagnostics().iter().all(|d| d.code != "DEPTH_LIMIT"), || format!("stream {seed} hit the depth limit"))?;
        longest = longest.max(out.passes);
    }
    Ok(format!("{CONVERGENCE_STREAMS} streams, at most {longest} passes"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("channel semantics", criterion_1),
        ("product algebra", criterion_2),
        ("hiding", criterion_3),
        ("sequencer", criterion_4),
        ("rescue behaviour", criterion_5),
        ("compliance chain", criterion_6),
        ("order checking", criterion_7),
        ("determinism", criterion_8),
        ("convergence", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
