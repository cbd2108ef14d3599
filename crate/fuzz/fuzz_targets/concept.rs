#![no_main]

use interim_cli::commands::parse_concept;
use interim_cli::problem_file::{load_problem, TWO_STATE_EXCHANGE};
use libfuzzer_sys::fuzz_target;

// First line: the concept; second line, if any: the `--share` groups.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut lines = text.splitn(2, '\n');
    let name = lines.next().unwrap_or("");
    let share = lines.next();
    let (_, problem) = load_problem(TWO_STATE_EXCHANGE).unwrap();
    if let Ok(concept) = parse_concept(name, &problem, None, share) {
        concept.check(&problem).expect("parsed concepts apply to their problem");
    }
});
