#![no_main]

use libfuzzer_sys::fuzz_target;
use wach_core::padic::parse_integer;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(v) = parse_integer(text) {
            assert_eq!(parse_integer(&v.to_string()).unwrap(), v);
        }
    }
});
