// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(base) = reoflow_core::dsl::parse_rulebase(text) {
        let printed = reoflow_core::dsl::print_rulebase(&base);
        assert_eq!(reoflow_core::dsl::parse_rulebase(&printed).ok(), Some(base));
    }
});
