#![no_main]

use beamsched::scenario::ModCodTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = ModCodTable::from_csv_str(text) {
            let lo = table.lowest_threshold_db();
            assert!(table.efficiency_db(lo - lo.abs().max(1.0)) == 0.0);
            assert!(table.efficiency_db(lo) > 0.0);
        }
    }
});
