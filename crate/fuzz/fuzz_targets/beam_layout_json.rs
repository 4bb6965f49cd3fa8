#![no_main]

use beamsched::scenario::BeamLayout;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(layout) = BeamLayout::from_json_str(text) {
            let again = BeamLayout::from_json_str(&layout.to_json_string()).expect("round trip");
            assert_eq!(again.beams.len(), layout.beams.len());
        }
    }
});
