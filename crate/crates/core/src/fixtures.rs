//! Small built-in problems used by the CLI and tests.

use crate::games::{AffinePiece, Delivery, Economy, Problem, Profile, UtilitySpec};
use crate::probability::{InformationStructure, Partition, StateSpace};

/// Three players, two equiprobable states `a`, `b`. Players 1 and 3 learn
/// nothing, player 2 learns the state. Everyone owns one unit of a single
/// good. Players 1 and 3 value the good linearly; player 2 values it at `a`
/// and dislikes it at `b` (`1 - x`). Interim delivery.
pub fn two_state_exchange() -> Problem {
    let space = StateSpace::new(vec!["a".into(), "b".into()], vec![0.5, 0.5]).expect("valid prior");
    let trivial = Partition::trivial(2);
    let discrete = Partition::discrete(2);
    let info = InformationStructure::new(vec![trivial.clone(), discrete, trivial]).expect("valid partitions");
    let linear = UtilitySpec::linear(2, vec![1.0], 0.0);
    let player2 = UtilitySpec::new(
        1,
        vec![
            vec![AffinePiece::new(vec![1.0], 0.0)],
            vec![AffinePiece::new(vec![-1.0], 1.0)],
        ],
    )
    .expect("valid utility");
    let economy = Economy::new(
        space,
        info,
        1,
        vec![vec![vec![1.0]; 2]; 3],
        vec![linear.clone(), player2, linear],
        Delivery::Interim,
    )
    .expect("valid economy");
    Problem::Economy(economy)
}

/// Interim allocation `(x_1, x_2(a), x_2(b), x_3)` of [`two_state_exchange`].
pub fn two_state_allocation(problem: &Problem, x1: f64, x2a: f64, x2b: f64, x3: f64) -> Profile {
    Profile::from_states(
        problem,
        vec![
            vec![vec![x1], vec![x1]],
            vec![vec![x2a], vec![x2b]],
            vec![vec![x3], vec![x3]],
        ],
    )
    .expect("measurable allocation")
}
