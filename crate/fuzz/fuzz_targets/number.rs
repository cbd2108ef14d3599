#![no_main]

use interim_cli::number::{parse_number, Number};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_number(text) {
        assert_eq!(parse_number(&Number(r).to_string()).unwrap(), r);
    }
});
