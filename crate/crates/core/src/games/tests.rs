use super::*;
use crate::fixtures::{two_state_allocation, two_state_exchange};

fn two_players_two_states(p1: Partition, p2: Partition, e1: [f64; 2], delivery: Delivery) -> Problem {
    let space = StateSpace::uniform(2).unwrap();
    let info = InformationStructure::new(vec![p1, p2]).unwrap();
    let u = UtilitySpec::linear(2, vec![1.0], 0.0);
    Economy::new(
        space,
        info,
        1,
        vec![vec![vec![e1[0]], vec![e1[1]]], vec![vec![1.0], vec![1.0]]],
        vec![u.clone(), u],
        delivery,
    )
    .unwrap()
    .into()
}

#[test]
fn example_economy_is_valid() {
    let p = two_state_exchange();
    let report = p.validate();
    assert!(report.is_valid(), "{report:?}");
    // 1 - x_2 goes negative on the feasible box; flagged, not rejected.
    assert!(!report.warnings.is_empty());
}

#[test]
fn endowment_measurability_follows_delivery() {
    let ok = two_players_two_states(Partition::discrete(2), Partition::trivial(2), [1.0, 2.0], Delivery::Interim);
    assert!(ok.validate().is_valid());
    let bad = two_players_two_states(Partition::trivial(2), Partition::discrete(2), [1.0, 2.0], Delivery::Interim);
    let report = bad.validate();
    assert_eq!(report.violations.len(), 1);
    assert!(report.violations[0].contains("P_1"));
    // Ex post delivery only needs the pooled partition.
    let ex_post = two_players_two_states(Partition::trivial(2), Partition::discrete(2), [1.0, 2.0], Delivery::ExPost);
    assert!(ex_post.validate().is_valid());
}

#[test]
fn utility_evaluation() {
    let p = two_state_exchange();
    assert_eq!(utility_eval(p.utility(1), &[0.5], 1).unwrap(), 0.5);
    assert_eq!(utility_eval(p.utility(0), &[1.5], 0).unwrap(), 1.5);
    let tent = UtilitySpec::new(
        1,
        vec![vec![AffinePiece::new(vec![1.0], 0.0), AffinePiece::new(vec![-1.0], 2.0)]],
    )
    .unwrap();
    assert_eq!(tent.eval(&[2.0], 0).unwrap(), 0.0);
    assert_eq!(tent.eval(&[1.0, 1.0], 0), Err(Error::Dimension { expected: 1, found: 2 }));
}

#[test]
fn interim_utilities_of_example() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 1.25, 0.5, 0.5, 1.25);
    assert_eq!(interim_utility(&p, &x, 0).unwrap(), vec![1.25, 1.25]);
    assert_eq!(interim_utility(&p, &x, 2).unwrap(), vec![1.25, 1.25]);
    let ones = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    assert_eq!(interim_utility(&p, &ones, 1).unwrap(), vec![1.0, 0.0]);
}

#[test]
fn trivial_information_gives_ex_ante_mean() {
    let space = StateSpace::uniform(2).unwrap();
    let info = InformationStructure::new(vec![Partition::trivial(2)]).unwrap();
    let u = UtilitySpec::new(
        1,
        vec![vec![AffinePiece::new(vec![1.0], 0.0)], vec![AffinePiece::new(vec![3.0], 0.0)]],
    )
    .unwrap();
    let p: Problem = Economy::new(space, info, 1, vec![vec![vec![1.0]; 2]], vec![u], Delivery::Interim)
        .unwrap()
        .into();
    let x = Profile::constant(&p, vec![vec![1.0]]).unwrap();
    assert_eq!(interim_utility(&p, &x, 0).unwrap(), vec![2.0, 2.0]);
}

#[test]
fn profiles_reject_unmeasurable_values() {
    let p = two_state_exchange();
    let err = Profile::from_states(
        &p,
        vec![
            vec![vec![1.0], vec![2.0]],
            vec![vec![1.0], vec![0.0]],
            vec![vec![1.0], vec![1.0]],
        ],
    )
    .unwrap_err();
    assert!(matches!(err, Error::NotMeasurable(_)));
    let infeasible = two_state_allocation(&p, 2.0, 1.0, 1.0, 1.0);
    assert!(matches!(interim_utility(&p, &infeasible, 0), Err(Error::InvalidProfile(_))));
}

/// Player 1 picks x_1 ∈ [0,1], player 2 picks x_2 ∈ [0,1];
/// u_1 = min(x_1, 1 - x_2).
fn opponent_game() -> Problem {
    let space = StateSpace::uniform(2).unwrap();
    let info = InformationStructure::new(vec![Partition::trivial(2), Partition::discrete(2)]).unwrap();
    let unit = ActionSet::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let u1 = UtilitySpec::new(
        2,
        vec![vec![AffinePiece::new(vec![1.0, 0.0], 0.0), AffinePiece::new(vec![0.0, -1.0], 1.0)]; 2],
    )
    .unwrap();
    let u2 = UtilitySpec::linear(2, vec![0.0, 1.0], 0.0);
    NormalFormGame::new(space, info, vec![unit.clone(), unit], vec![u1, u2], Delivery::Interim)
        .unwrap()
        .into()
}

#[test]
fn guaranteed_utility_takes_worst_vertex() {
    let g = opponent_game();
    let y = CoalitionProfile {
        coalition: Coalition::singleton(0),
        strategies: vec![Strategy::constant(Partition::trivial(2), vec![0.8])],
    };
    let vertex = guaranteed_interim_utility(&g, &y, 0).unwrap();
    assert_eq!(vertex, vec![0.0, 0.0]);

    // Brute force over an opponent grid of step 1/100 per state.
    let mut worst = f64::INFINITY;
    for ka in 0..=100 {
        for kb in 0..=100 {
            let x2 = [ka as f64 / 100.0, kb as f64 / 100.0];
            let x = Profile::from_states(
                &g,
                vec![vec![vec![0.8]; 2], vec![vec![x2[0]], vec![x2[1]]]],
            )
            .unwrap();
            let v = interim_utility(&g, &x, 0).unwrap()[0];
            worst = worst.min(v);
        }
    }
    assert!((worst - vertex[0]).abs() < 1e-12);
}

#[test]
fn guaranteed_equals_interim_without_opponents() {
    let g = opponent_game();
    let x = Profile::from_states(&g, vec![vec![vec![0.3]; 2], vec![vec![0.2], vec![0.9]]]).unwrap();
    let y = CoalitionProfile {
        coalition: Coalition::grand(2),
        strategies: x.strategies().to_vec(),
    };
    for i in 0..2 {
        assert_eq!(
            guaranteed_interim_utility(&g, &y, i).unwrap(),
            interim_utility(&g, &x, i).unwrap()
        );
    }
}

#[test]
fn guaranteed_equals_interim_for_economies() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 1.0, 0.5, 0.5, 1.5);
    let y = CoalitionProfile {
        coalition: Coalition::from_members([1, 2]),
        strategies: vec![x.strategy(1).clone(), x.strategy(2).clone()],
    };
    assert_eq!(
        guaranteed_interim_utility(&p, &y, 1).unwrap(),
        interim_utility(&p, &x, 1).unwrap()
    );
}

#[test]
fn example_grid_counts_match_stars_and_bars() {
    let p = two_state_exchange();
    // x_1, x_3 constant, x_2 per state, all in multiples of 1/2 summing to 3:
    // choosing (x_1, x_3) with x_1 + x_3 ≤ 3 fixes x_2, so C(6+2, 2) = 28.
    let grid = profile_grid(&p, 0.5, 10_000).unwrap();
    assert_eq!(grid.len(), 28);
    for x in &grid {
        x.check_valid(&p).unwrap();
        for w in 0..2 {
            let total: f64 = (0..3).map(|i| x.value(i, w)[0]).sum();
            assert!((total - 3.0).abs() < 1e-12);
            assert!((0..3).all(|i| (x.value(i, w)[0] * 2.0).fract() == 0.0));
        }
    }
    assert_eq!(profile_grid(&p, 0.25, 10_000).unwrap().len(), 91);
    assert!(matches!(profile_grid(&p, 0.25, 50), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn coarse_resolution_keeps_boundary_points() {
    let p = two_state_exchange();
    let grid = profile_grid(&p, 5.0, 100).unwrap();
    // Each non-absorbing coordinate is 0 or the full total.
    let shown: Vec<Vec<f64>> = grid.iter().map(|x| (0..3).map(|i| x.value(i, 0)[0]).collect()).collect();
    assert_eq!(shown, vec![vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 3.0], vec![3.0, 0.0, 0.0]]);
}

#[test]
fn single_player_grid_is_autarky() {
    let space = StateSpace::uniform(2).unwrap();
    let info = InformationStructure::new(vec![Partition::discrete(2)]).unwrap();
    let p: Problem = Economy::new(
        space,
        info,
        1,
        vec![vec![vec![1.0], vec![2.0]]],
        vec![UtilitySpec::linear(2, vec![1.0], 0.0)],
        Delivery::Interim,
    )
    .unwrap()
    .into();
    let grid = profile_grid(&p, 0.5, 100).unwrap();
    assert_eq!(grid.len(), 1);
    assert_eq!(grid[0].state_values(), vec![vec![vec![1.0], vec![2.0]]]);
}

#[test]
fn game_grid_mixes_vertices() {
    let g = opponent_game();
    // Player 1: one block, player 2: two blocks; 3 points per block at m = 2.
    assert_eq!(profile_grid(&g, 0.5, 100).unwrap().len(), 27);
}

#[test]
fn restriction_to_the_pooled_partition_preserves_interim_utilities() {
    // Three states; the pooled partition merges the first two.
    let space = StateSpace::new(vec!["a".into(), "b".into(), "c".into()], vec![0.2, 0.3, 0.5]).unwrap();
    let p1 = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
    let p2 = Partition::trivial(3);
    let info = InformationStructure::new(vec![p1.clone(), p2]).unwrap();
    let u1 = UtilitySpec::new(
        1,
        vec![
            vec![AffinePiece::new(vec![1.0], 0.0), AffinePiece::new(vec![0.5], 1.0)],
            vec![AffinePiece::new(vec![2.0], 0.0)],
            vec![AffinePiece::new(vec![1.0], 0.5)],
        ],
    )
    .unwrap();
    let u2 = UtilitySpec::new(
        1,
        vec![
            vec![AffinePiece::new(vec![1.0], 0.0)],
            vec![AffinePiece::new(vec![0.5], 0.0), AffinePiece::new(vec![0.0], 0.4)],
            vec![AffinePiece::new(vec![3.0], 0.0)],
        ],
    )
    .unwrap();
    let p: Problem = Economy::new(
        space,
        info,
        1,
        vec![vec![vec![1.0], vec![1.0], vec![2.0]], vec![vec![1.0]; 3]],
        vec![u1, u2],
        Delivery::ExPost,
    )
    .unwrap()
    .into();
    let h = p.info().join().clone();
    let r = restrict_to_field(&p, &h).unwrap();
    assert_eq!(r.n_states(), 2);
    assert_eq!(r.space().labels(), ["a+b", "c"]);
    for x in profile_grid(&p, 0.25, 10_000).unwrap() {
        let rx = restrict_profile(&p, &h, &r, &x).unwrap();
        for i in 0..2 {
            let before = interim_utility(&p, &x, i).unwrap();
            let after = interim_utility(&r, &rx, i).unwrap();
            for (k, block) in h.blocks().iter().enumerate() {
                for &w in block {
                    assert!((before[w] - after[k]).abs() < 1e-10);
                }
            }
        }
    }
    let too_coarse = Partition::trivial(3);
    assert!(matches!(restrict_to_field(&p, &too_coarse), Err(Error::InvalidField(_))));
}

#[test]
fn restriction_to_discrete_field_is_identity() {
    let p = two_state_exchange();
    let h = Partition::discrete(2);
    let r = restrict_to_field(&p, &h).unwrap();
    assert_eq!(r.space().prior(), p.space().prior());
    assert_eq!(r.info(), p.info());
    assert_eq!(r.utilities(), p.utilities());
}

#[test]
fn decoding_rejects_inconsistent_shapes() {
    let p = two_state_exchange();
    let json = serde_json::to_value(&p).unwrap();
    assert_eq!(serde_json::from_value::<Problem>(json.clone()).unwrap(), p);
    let mut ragged = json.clone();
    ragged["endowments"][0] = serde_json::json!([[1.0]]);
    assert!(serde_json::from_value::<Problem>(ragged).is_err());
    let mut no_pieces = json.clone();
    no_pieces["utilities"][1]["per_state"][0] = serde_json::json!([]);
    assert!(serde_json::from_value::<Problem>(no_pieces).is_err());
    let mut prior = json;
    prior["space"]["prior"] = serde_json::json!([1.0]);
    assert!(serde_json::from_value::<Problem>(prior).is_err());

    let x = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    let mut short = serde_json::to_value(&x).unwrap();
    short["strategies"][1]["values"] = serde_json::json!([[1.0]]);
    assert!(serde_json::from_value::<Profile>(short).is_err());
}
