// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = reoflow_core::dsl::parse_env(text, None);
    let _ = reoflow_core::dsl::parse_env(text, Some(&reoflow_core::scenario::builtin_circuit()));
});
