// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = reoflow_core::dsl::parse_term(text) {
        assert_eq!(reoflow_core::dsl::parse_term(&t.to_string()).ok(), Some(t));
    }
});
