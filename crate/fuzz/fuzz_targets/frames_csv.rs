#![no_main]

use beamsched::engine::{parse_frames_csv, reaggregate};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = parse_frames_csv(text) {
            if let Ok(report) = reaggregate(&rows) {
                assert!((0.0..=1.0).contains(&report.loss_frame_fraction));
            }
        }
    }
});
