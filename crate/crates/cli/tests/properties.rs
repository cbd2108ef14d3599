mod common;

use common::{random_economy, random_game, EconomyShape};
use interim_cli::number::{parse_number, Number, Rational};
use interim_cli::problem_file::{load_problem, ProblemFile};
use interim_cli::profile_spec::{format_profile, ProfileSpec};
use interim_core::games::profile_grid;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn numbers_display_and_parse_back(n in -1_000_000i128..1_000_000, d in 1i128..10_000) {
        let r = Rational::new(n, d);
        prop_assert_eq!(parse_number(&Number(r).to_string()).unwrap(), r);
    }

    #[test]
    fn decimals_are_exact(int in 0u32..100_000, frac in 0u32..10_000, neg: bool) {
        let text = format!("{}{int}.{frac:04}", if neg { "-" } else { "" });
        let expected = Rational::new(i128::from(int) * 10_000 + i128::from(frac), 10_000);
        let expected = if neg { -expected } else { expected };
        prop_assert_eq!(parse_number(&text).unwrap(), expected);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,24}") {
        let _ = parse_number(&s);
        let _ = ProfileSpec::parse(&s);
    }

    #[test]
    fn problem_files_round_trip(seed: u64, game: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = EconomyShape { max_players: 3, max_goods: 2, max_states: 4, trivial_information: false };
        let p = if game { random_game(&mut rng, 3, false) } else { random_economy(&mut rng, &shape) };
        let file = ProblemFile::from_problem(&p).unwrap();
        let text = file.to_toml();
        let (parsed, back) = load_problem(&text).unwrap();
        prop_assert_eq!(&parsed, &file);
        prop_assert_eq!(ProblemFile::parse(&parsed.to_toml()).unwrap(), parsed);
        // Priors pass through their shortest decimal form.
        for (a, b) in back.space().prior().iter().zip(p.space().prior()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
        prop_assert_eq!(back.info(), p.info());
        prop_assert_eq!(back.utilities(), p.utilities());
    }

    #[test]
    fn profiles_format_and_parse_back(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = EconomyShape { max_players: 3, max_goods: 2, max_states: 3, trivial_information: false };
        let p = random_economy(&mut rng, &shape);
        if let Ok(grid) = profile_grid(&p, 0.5, 5_000) {
            for x in grid.iter().step_by(grid.len() / 8 + 1) {
                let text = format_profile(&p, x);
                prop_assert_eq!(&ProfileSpec::parse(&text).unwrap().to_profile(&p).unwrap(), x);
            }
        }
    }
}
