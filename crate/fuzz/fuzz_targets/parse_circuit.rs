// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = reoflow_core::dsl::parse_circuit(text) {
        let back = reoflow_core::dsl::parse_circuit(&reoflow_core::dsl::print_circuit(&c)).expect("printed circuit parses");
        assert!(c.isomorphic(&back));
    }
});
