#![no_main]

use apsys::membrane::{format_steps, parse_steps};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(steps) = parse_steps(text) {
        assert_eq!(
            parse_steps(&format_steps(&steps)).expect("formatted steps parse"),
            steps
        );
    }
});
