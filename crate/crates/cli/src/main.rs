// SPDX-License-Identifier: Apache-2.0

//! `reoflow` command-line tool.
//!
//! Exit status: 0 success, 1 findings (deadlocks, failures, warnings, order
//! violations), 2 usage or input errors.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use reoflow_core::analysis::analyze;
use reoflow_core::automata::{compile, to_dot, to_json};
use reoflow_core::circuit::{export_dot, validate_circuit, Circuit};
use reoflow_core::dsl::{parse_circuit, parse_env, parse_events, parse_map, parse_rulebase, parse_term};
use reoflow_core::scenario::{map_trace, run_rescue, ScenarioInput};
use reoflow_core::semlog::{Engine, EngineConfig, EventOrigin, Term};
use reoflow_core::sim::{simulate, Session, SimConfig, Trace};

#[derive(Parser)]
#[command(name = "reoflow", version, about = "Coordination circuits: compile, simulate, analyse, check compliance")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Deepest term the compliance engine stores.
    #[arg(long, global = true, default_value_t = 8)]
    max_depth: usize,
    /// Suppress human-readable output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a circuit file.
    Parse {
        path: PathBuf,
        /// Print the circuit as a DOT graph.
        #[arg(long)]
        dot: bool,
    },
    /// Compile a circuit to a constraint automaton.
    Compile {
        path: PathBuf,
        #[arg(long, conflicts_with = "dot")]
        json: bool,
        #[arg(long)]
        dot: bool,
        /// Print state and transition counts.
        #[arg(long)]
        stats: bool,
    },
    /// Run a circuit against an environment script.
    Simulate {
        path: PathBuf,
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        rounds: Option<usize>,
        /// Write the trace here instead of standard output.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Reachability and deadlock analysis.
    Check {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the compliance rules over events or a mapped trace.
    Comply {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Print the derivation tree of this fact.
        #[arg(long)]
        explain: Option<String>,
    },
    /// Run the built-in rescue scenario end to end.
    Scenario {
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(long)]
        rounds: Option<usize>,
        /// Extra compliance events ingested after the trace.
        #[arg(long)]
        events: Option<PathBuf>,
        /// Write the report here; `-` for standard output.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Step a compiled circuit interactively from standard input.
    Repl { path: PathBuf },
}

/// Failure that maps to exit status 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

type Outcome = Result<bool, Fatal>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, cli.global) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> Result<Circuit, Fatal> {
    let text = read(path)?;
    parse_circuit(&text).map_err(|e| Fatal(format!("{}:\n{e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("value serialises") + "\n"
}

fn note(g: Global, text: &str) {
    if !g.quiet && !text.is_empty() {
        eprint!("{text}");
        if !text.ends_with('\n') {
            eprintln!();
        }
    }
}

fn run(cmd: Command, g: Global) -> Outcome {
    match cmd {
        Command::Parse { path, dot } => {
            let c = load_circuit(&path)?;
            let report = validate_circuit(&c);
            if dot {
                print!("{}", export_dot(&c));
            }
            note(g, &format!("{}: {} channels, {} ports\n{report}", c.name, c.channels.len(), c.ports.len()));
            if report.is_ok() {
                Ok(false)
            } else {
                Err(Fatal(format!("{} has validation errors", path.display())))
            }
        }
        Command::Compile { path, json, dot, stats } => {
            let a = compile(&load_circuit(&path)?)?;
            if json {
                print!("{}", pretty(&to_json(&a)));
            } else if dot {
                print!("{}", to_dot(&a));
            }
            if stats {
                let text = format!("states: {}\ntransitions: {}\n", a.state_count(), a.transitions.len());
                if json || dot {
                    note(g, &text);
                } else {
                    print!("{text}");
                }
            }
            Ok(false)
        }
        Command::Simulate { path, env, rounds, trace } => {
            let c = load_circuit(&path)?;
            let a = compile(&c)?;
            let env_text = read(&env)?;
            let env = parse_env(&env_text, Some(&c)).map_err(|e| Fatal(format!("{}:\n{e}", env.display())))?;
            let cfg = SimConfig { seed: g.seed, max_rounds: rounds.unwrap_or(usize::MAX) };
            let t = simulate(&a, &env, cfg)?;
            match trace {
                Some(out) => {
                    fs::write(&out, t.to_json()).map_err(|e| Fatal(format!("{}: {e}", out.display())))?;
                    note(g, &t.to_string());
                }
                None => print!("{}", t.to_json()),
            }
            Ok(false)
        }
        Command::Check { path, json } => {
            let a = compile(&load_circuit(&path)?)?;
            let report = analyze(&a);
            if json {
                let v = json!({
                    "reachable": report.reachable,
                    "transitions": report.transitions,
                    "deadlocks": report.deadlocks.iter().map(|s| json!({"index": s.index, "label": s.label})).collect::<Vec<_>>(),
                    "notes": report.notes,
                });
                print!("{}", pretty(&v));
                note(g, &report.to_string());
            } else if !g.quiet {
                print!("{report}");
            }
            Ok(!report.deadlock_free())
        }
        Command::Comply { rules, events, trace, map, explain } => {
            let rules_text = read(&rules)?;
            let base = parse_rulebase(&rules_text).map_err(|e| Fatal(format!("{}:\n{e}", rules.display())))?;
            let (terms, origin) = match (events, trace, map) {
                (Some(ev), None, None) => {
                    let text = read(&ev)?;
                    (parse_events(&text).map_err(|e| Fatal(format!("{}:\n{e}", ev.display())))?, EventOrigin::Script)
                }
                (None, Some(tr), Some(mp)) => {
                    let t = Trace::from_json(&read(&tr)?).map_err(|e| Fatal(format!("{}: {e}", tr.display())))?;
                    let m = parse_map(&read(&mp)?, None).map_err(|e| Fatal(format!("{}:\n{e}", mp.display())))?;
                    (map_trace(&t, &m).into_iter().map(|e| e.term).collect(), EventOrigin::TraceMapped)
                }
                _ => return Err(Fatal("give either --events, or --trace together with --map".into())),
            };
            let mut engine = Engine::new(base, EngineConfig { max_depth: g.max_depth, ..Default::default() });
            engine.ingest_all(terms, origin);
            engine.saturate();
            let verdict = engine.verdict();
            print!("{}", pretty(&verdict.to_json()));
            note(g, &verdict.to_string());
            for d in engine.diagnostics() {
                note(g, &format!("{}: {}", d.code, d.message));
            }
            if let Some(fact) = explain {
                let t = parse_term(&fact)?;
                note(g, &engine.explain(&t)?.to_string());
            }
            Ok(verdict.has_findings())
        }
        Command::Scenario { env, rounds, events, json } => {
            let circuit = reoflow_core::scenario::builtin_circuit();
            let env = match env {
                Some(p) => {
                    let text = read(&p)?;
                    Some(parse_env(&text, Some(&circuit)).map_err(|e| Fatal(format!("{}:\n{e}", p.display())))?)
                }
                None => None,
            };
            let extra: Vec<Term> = match events {
                Some(p) => parse_events(&read(&p)?).map_err(|e| Fatal(format!("{}:\n{e}", p.display())))?,
                None => Vec::new(),
            };
            let input = ScenarioInput {
                seed: g.seed,
                rounds,
                env,
                map: None,
                extra_events: extra,
                engine: EngineConfig { max_depth: g.max_depth, ..Default::default() },
            };
            let report = run_rescue(&input)?;
            let text = pretty(&report.to_json());
            match json.as_deref() {
                Some(p) if p != Path::new("-") => fs::write(p, &text).map_err(|e| Fatal(format!("{}: {e}", p.display())))?,
                Some(_) => print!("{text}"),
                None => {}
            }
            let order: Vec<String> = report.dispatch_order().iter().map(|i| format!("case{i}")).collect();
            let summary = format!("{}dispatch: {}\nevents: {}\n{}", report.trace, order.join(" "), report.events.len(), report.verdict);
            if json.as_deref() == Some(Path::new("-")) || g.quiet {
                note(g, &summary);
            } else {
                print!("{summary}");
            }
            Ok(report.verdict.has_findings())
        }
        Command::Repl { path } => {
            let a = compile(&load_circuit(&path)?)?;
            let mut session = Session::new(a, g.seed);
            let stdin = io::stdin();
            let mut out = io::stdout().lock();
            for line in stdin.lock().lines() {
                let line = line?;
                match session.command(&line) {
                    Some(reply) if reply.is_empty() => {}
                    Some(reply) => writeln!(out, "{reply}")?,
                    None => break,
                }
            }
            Ok(false)
        }
    }
}
