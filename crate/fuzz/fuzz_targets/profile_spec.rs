#![no_main]

use interim_cli::problem_file::{load_problem, TWO_STATE_EXCHANGE};
use interim_cli::profile_spec::ProfileSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = ProfileSpec::parse(text) {
        let (_, problem) = load_problem(TWO_STATE_EXCHANGE).unwrap();
        let _ = spec.to_profile(&problem);
    }
});
