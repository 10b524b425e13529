#![no_main]

use apsys::grid::{canonicalize, parse_grid, render_ascii};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(a) = parse_grid(text) {
        let c = canonicalize(&a);
        let back = parse_grid(&render_ascii(&c)).expect("rendered grid parses");
        assert_eq!(canonicalize(&back), c);
    }
});
