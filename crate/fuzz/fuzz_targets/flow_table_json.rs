#![no_main]

use laxrecon::kp::FlowTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    if let Ok(t) = FlowTable::from_json(&value) {
        let again = FlowTable::from_json(&t.to_json()).expect("round trip");
        assert_eq!(again.to_json(), t.to_json());
        let _ = t.invariant_violations();
    }
});
