// SPDX-License-Identifier: Apache-2.0

//! Coordination circuits compiled to constraint automata, simulated against
//! scripted environments, and checked for compliance with a small deontic
//! rule language.

pub mod analysis;
pub mod automata;
pub mod circuit;
pub mod dsl;
pub mod scenario;
pub mod semlog;
pub mod sim;
