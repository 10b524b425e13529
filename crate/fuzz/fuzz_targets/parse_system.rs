#![no_main]

use apsys::{parse_system, print_system};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = parse_system(text) {
        let again = parse_system(&print_system(&s)).expect("printed system parses");
        assert_eq!(print_system(&again), print_system(&s));
    }
});
