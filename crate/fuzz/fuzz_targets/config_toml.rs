#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = beamsched::scenario::ScenarioConfig::from_toml_str(text) {
            // Anything accepted must also build its sector layout.
            config.sector_layout().expect("validated config has a sector layout");
        }
    }
});
