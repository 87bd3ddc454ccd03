#![no_main]

use laxrecon::recon::QTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    if let Ok(t) = QTable::from_json(&value) {
        let again = QTable::from_json(&t.to_json()).expect("round trip");
        assert_eq!(again.to_json(), t.to_json());
    }
});
