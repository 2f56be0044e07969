// SPDX-License-Identifier: Apache-2.0

//! Compliance checking over event streams with a small forward-chaining
//! logic: deontic permissions, intensity, counting and compliance statuses.

mod engine;
mod rules;
mod term;

pub use engine::{
    check_sequence, Derivation, Diagnostic, Engine, EngineConfig, Event, EventOrigin, ExplainNode, Justification,
    OrderViolation, SaturationOutcome, UnknownFact, Verdict, VerdictItem,
};
pub use rules::{
    classify, is_operator, BuiltinKind, BuiltinRule, Guard, ProtocolOrder, Rule, RuleBase, RuleClass, RuleItem,
    RuleRejection, StandingFact,
};
pub use term::{Bindings, CountExpr, Modality, Pattern, Term};
