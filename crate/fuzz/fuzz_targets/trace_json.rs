// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = reoflow_core::sim::Trace::from_json(text) {
        assert_eq!(reoflow_core::sim::Trace::from_json(&t.to_json()).ok(), Some(t));
    }
});
