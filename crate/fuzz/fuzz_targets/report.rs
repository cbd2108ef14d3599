#![no_main]

use interim_cli::report::Verifiable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = Verifiable::from_json(text) {
        // `verify` only re-checks certificates against a valid problem.
        if v.problem.validate().violations.is_empty() {
            let _ = v.check();
        }
    }
});
