#![no_main]

use libfuzzer_sys::fuzz_target;
use wach_core::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_json_str(text) {
            // accepted configs must survive a serialize/parse round trip
            let echoed = serde_json::to_string(&cfg).unwrap();
            assert_eq!(RunConfig::from_json_str(&echoed).unwrap(), cfg);
        }
    }
});
