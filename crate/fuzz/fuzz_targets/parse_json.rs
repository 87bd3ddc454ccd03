#![no_main]

use laxrecon::ring::{DiffPoly, Frame};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    if let Ok(p) = DiffPoly::from_json(Frame::F, &value) {
        assert_eq!(DiffPoly::from_json(Frame::F, &p.to_json()).unwrap(), p);
        assert_eq!(DiffPoly::parse(Frame::F, &p.to_string()).unwrap(), p);
    }
});
