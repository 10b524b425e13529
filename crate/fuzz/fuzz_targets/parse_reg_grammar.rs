#![no_main]

use apsys::translate::parse_reg_grammar;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_reg_grammar(text);
    }
});
