#![no_main]

use laxrecon::ring::{DiffPoly, Frame};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for frame in [Frame::U, Frame::V, Frame::F, Frame::W] {
        if let Ok(p) = DiffPoly::parse(frame, text) {
            // only canonical text is accepted
            assert_eq!(p.to_string(), text);
            assert_eq!(DiffPoly::parse(frame, &p.to_string()).unwrap(), p);
        }
    }
});
