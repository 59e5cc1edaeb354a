#![no_main]

use libfuzzer_sys::fuzz_target;
use wach_core::series::{parse_series, SeriesRing};

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let p = [3u64, 5, 7][selector as usize % 3];
    let ring = SeriesRing::new(p, 4, 8 + (selector as usize >> 2) % 24).unwrap();
    if let Ok(f) = parse_series(ring, text) {
        assert_eq!(parse_series(ring, &f.to_string()).unwrap(), f);
    }
});
