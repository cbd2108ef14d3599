#![no_main]

use interim_cli::problem_file::{load_problem, ProblemFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(source) = std::str::from_utf8(data) else { return };
    if let Ok((file, _)) = load_problem(source) {
        // Whatever loads must survive a trip through its own output.
        let again = ProblemFile::parse(&file.to_toml()).expect("re-parse");
        assert_eq!(again, file);
    }
});
