use super::*;
use crate::fixtures::{two_state_allocation, two_state_exchange};
use crate::games::{Delivery, Economy, UtilitySpec};
use crate::probability::{InformationStructure, StateSpace};

const A: usize = 0;
const B: usize = 1;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn equal_split_is_in_the_interim_core() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    let verdict = in_core(&p, &x, &CoreConcept::interim(0.0)).unwrap();
    assert!(verdict.member, "{verdict:?}");
    assert!(verdict.certificate.is_none());
    // {1},{2},{3} see 1,3,1 events; pairs 1,1,1; the grand coalition 1.
    assert_eq!(verdict.subproblems, 9);
    for s in Coalition::all_nonempty(3) {
        for f in crate::probability::common_knowledge_events(s, p.info()).unwrap() {
            assert!(blocks_interim(&p, &x, s, &f, 0.0).unwrap().is_none());
        }
    }
}

#[test]
fn pair_cannot_block_a_dictatorship_on_the_whole_space() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 3.0, 0.0, 0.0, 0.0);
    let pair = Coalition::from_members([1, 2]);
    // Player 2 would need y_2(b) < 0 to beat the status quo 1 at b.
    assert!(blocks_interim(&p, &x, pair, &Event::full(2), 0.0).unwrap().is_none());
    let verdict = in_core(&p, &x, &CoreConcept::interim(0.0)).unwrap();
    let cert = verdict.certificate.unwrap();
    assert_eq!(cert.coalition, Coalition::singleton(1));
    assert_eq!(cert.event, Event::single(A));
    verify_certificate(&p, &x, &CoreConcept::interim(0.0), &cert).unwrap();
}

#[test]
fn events_must_be_common_knowledge() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    let pair = Coalition::from_members([0, 1]);
    assert_eq!(
        blocks_interim(&p, &x, pair, &Event::single(A), 0.0),
        Err(Error::NotCommonKnowledge)
    );
}

#[test]
fn autarky_cannot_improve_on_itself() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    for i in 0..3 {
        let s = Coalition::singleton(i);
        for w in [A, B] {
            assert!(blocks_weak_interim_private(&p, &x, s, w).unwrap().is_none());
        }
        assert!(blocks_private(&p, &x, s).unwrap().is_none());
    }
}

#[test]
fn private_core_pair_cannot_block_equal_split() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    assert!(blocks_private(&p, &x, Coalition::from_members([0, 1])).unwrap().is_none());
}

#[test]
fn weak_interim_private_first_case() {
    let p = two_state_exchange();
    // α_1 = 1/2 goes to player 1.
    let x = two_state_allocation(&p, 1.5, 0.5, 0.5, 1.0);
    let cert = blocks_weak_interim_private(&p, &x, Coalition::from_members([1, 2]), A)
        .unwrap()
        .unwrap();
    let y2 = cert.profile.member(1).unwrap().state_values();
    let y3 = cert.profile.member(2).unwrap().state_values();
    assert!(close(y2[A][0], 0.75), "{y2:?}");
    assert!(close(y2[B][0], 0.75), "{y2:?}");
    assert!(close(y3[A][0], 1.25), "{y3:?}");
    assert!(cert.min_margin() > STRICTNESS);
}

#[test]
fn weak_interim_private_second_case() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    let verdict = in_core(&p, &x, &CoreConcept::WeakInterimPrivate).unwrap();
    assert!(!verdict.member);
    let cert = verdict.certificate.unwrap();
    assert_eq!(cert.coalition, Coalition::from_members([0, 1]));
    assert_eq!(cert.event, Event::single(B));
    let y1 = cert.profile.member(0).unwrap().state_values();
    let y2 = cert.profile.member(1).unwrap().state_values();
    assert!(close(y1[A][0], 1.5) && close(y1[B][0], 1.5), "{y1:?}");
    assert!(close(y2[A][0], 0.5) && close(y2[B][0], 0.5), "{y2:?}");
    // Player 2 at b: 1 - 1/2 against 0.
    assert!(close(cert.margins[1][0], 0.5));
}

#[test]
fn full_pooling_exposes_single_state_events() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    let pooled = vec![p.info().join().clone(); 3];
    let pair = Coalition::from_members([0, 1]);
    assert_eq!(
        blocks_interim(&p, &x, pair, &Event::single(B), 0.0),
        Err(Error::NotCommonKnowledge)
    );
    // Under pooled fields {b} is an event of the pair, and the pair blocks there.
    let cert = blocks_fine(&p, &x, pair, &Event::single(B), &pooled, 0.0).unwrap();
    assert!(cert.is_some());
    let too_coarse = vec![Partition::trivial(2); 3];
    assert!(matches!(
        blocks_fine(&p, &x, pair, &Event::full(2), &too_coarse, 0.0),
        Err(Error::InvalidField(_))
    ));
}

#[test]
fn fine_with_own_partitions_matches_interim() {
    let p = two_state_exchange();
    let own = p.info().partitions().to_vec();
    for x in profile_grid(&p, 0.5, 1000).unwrap() {
        for s in Coalition::all_nonempty(3) {
            for f in crate::probability::common_knowledge_events(s, p.info()).unwrap() {
                let a = blocks_interim(&p, &x, s, &f, 0.0).unwrap();
                let b = blocks_fine(&p, &x, s, &f, &own, 0.0).unwrap();
                assert_eq!(a, b);
            }
        }
    }
}

#[test]
fn weak_interim_private_core_is_empty_on_the_grid() {
    let p = two_state_exchange();
    let scan = core_grid_scan(&p, &CoreConcept::WeakInterimPrivate, 0.25, 10_000, 3).unwrap();
    assert_eq!(scan.profiles, 91);
    assert_eq!(scan.members, 0);
    for (k, x, cert) in &scan.sample_blocked {
        assert!(!scan.membership[*k]);
        verify_certificate(&p, x, &CoreConcept::WeakInterimPrivate, cert).unwrap();
    }
    let interim = core_grid_scan(&p, &CoreConcept::interim(0.0), 0.25, 10_000, 100).unwrap();
    let equal = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    assert!(interim.sample_members.contains(&equal));
}

fn single_good_linear(n_states: usize, partitions: Vec<Partition>, endowments: Vec<Vec<f64>>) -> Problem {
    let n = partitions.len();
    let space = StateSpace::uniform(n_states).unwrap();
    let info = InformationStructure::new(partitions).unwrap();
    Economy::new(
        space,
        info,
        1,
        endowments
            .into_iter()
            .map(|e| e.into_iter().map(|v| vec![v]).collect())
            .collect(),
        vec![UtilitySpec::linear(n_states, vec![1.0], 0.0); n],
        Delivery::Interim,
    )
    .unwrap()
    .into()
}

#[test]
fn wasteful_allocations_are_impossible_but_dominated_ones_are_blocked() {
    // Two goods, two players, strictly complementary tastes: the grand coalition
    // gains from trading away from the endowment.
    let space = StateSpace::uniform(1).unwrap();
    let info = InformationStructure::new(vec![Partition::trivial(1); 2]).unwrap();
    let p: Problem = Economy::new(
        space,
        info,
        2,
        vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]],
        vec![
            UtilitySpec::linear(1, vec![1.0, 2.0], 0.0),
            UtilitySpec::linear(1, vec![2.0, 1.0], 0.0),
        ],
        Delivery::Interim,
    )
    .unwrap()
    .into();
    let x = Profile::constant(&p, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let grand = Coalition::grand(2);
    let y = blocking_lp(&p, &x, grand, &Event::full(1), 0.0, p.info().partitions())
        .unwrap()
        .unwrap();
    y.check_valid(&p).unwrap();
    let cert = blocks_interim(&p, &x, grand, &Event::full(1), 0.0).unwrap().unwrap();
    assert!(cert.lp_value > 0.4);
    // Margins are bounded by resources: a huge ε defeats every coalition.
    assert!(blocks_interim(&p, &x, grand, &Event::full(1), 10.0).unwrap().is_none());
}

#[test]
fn one_player_economy_is_always_in_the_core() {
    let p = single_good_linear(2, vec![Partition::discrete(2)], vec![vec![1.0, 2.0]]);
    let x = Profile::endowment(p.as_economy().unwrap()).unwrap();
    for concept in [
        CoreConcept::interim(0.0),
        CoreConcept::PrivateCore,
        CoreConcept::WeakInterimPrivate,
        CoreConcept::WeakCoreFlat { epsilon: 0.0 },
        CoreConcept::InterimFine {
            fields: vec![Partition::discrete(2)],
            epsilon: 0.0,
        },
    ] {
        assert!(in_core(&p, &x, &concept).unwrap().member, "{}", concept.name());
    }
}

#[test]
fn tampered_certificates_are_rejected() {
    let p = two_state_exchange();
    let x = two_state_allocation(&p, 1.0, 1.0, 1.0, 1.0);
    let concept = CoreConcept::WeakInterimPrivate;
    let mut cert = in_core(&p, &x, &concept).unwrap().certificate.unwrap();
    verify_certificate(&p, &x, &concept, &cert).unwrap();
    let mut elsewhere = cert.clone();
    elsewhere.event = Event::new(vec![7]);
    assert!(matches!(
        verify_certificate(&p, &x, &concept, &elsewhere),
        Err(Error::Certificate(_))
    ));
    cert.profile.strategies[0].values[0][0] = 1.0;
    cert.profile.strategies[1].values[1][0] = 1.0;
    assert!(matches!(
        verify_certificate(&p, &x, &concept, &cert),
        Err(Error::Certificate(_))
    ));
}

#[test]
fn guaranteed_blocking_in_games() {
    use crate::games::{ActionSet, AffinePiece, NormalFormGame};
    // Player 1 gets min(a_1, 1 - a_2); player 2 gets a_2. Player 1 alone can
    // only guarantee 0, so it cannot block x = (0, 1) on its own.
    let space = StateSpace::uniform(1).unwrap();
    let info = InformationStructure::new(vec![Partition::trivial(1); 2]).unwrap();
    let unit = ActionSet::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let u1 = UtilitySpec::new(
        2,
        vec![vec![AffinePiece::new(vec![1.0, 0.0], 0.0), AffinePiece::new(vec![0.0, -1.0], 1.0)]],
    )
    .unwrap();
    let u2 = UtilitySpec::new(
        2,
        vec![vec![AffinePiece::new(vec![0.0, 1.0], 0.0), AffinePiece::new(vec![1.0, 0.0], 0.5)]],
    )
    .unwrap();
    let g: Problem = NormalFormGame::new(space, info, vec![unit.clone(), unit], vec![u1, u2], Delivery::Interim)
        .unwrap()
        .into();
    let x = Profile::constant(&g, vec![vec![0.0], vec![1.0]]).unwrap();
    let all = Event::full(1);
    assert!(blocks_interim(&g, &x, Coalition::singleton(0), &all, 0.0).unwrap().is_none());
    // Jointly, a = (1/2, 3/4) yields (1/4, 3/4) against the status quo (0, 1/2).
    let cert = blocks_interim(&g, &x, Coalition::grand(2), &all, 0.0).unwrap().unwrap();
    verify_certificate(&g, &x, &CoreConcept::interim(0.0), &cert).unwrap();
    // ε-monotonicity: the same certificate works for any smaller ε.
    let eps = cert.min_margin() / 2.0;
    assert!(blocks_interim(&g, &x, Coalition::grand(2), &all, eps).unwrap().is_some());
}
