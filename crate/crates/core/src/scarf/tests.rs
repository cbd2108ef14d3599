use super::*;

fn c(members: &[usize]) -> Coalition {
    Coalition::from_members(members.iter().copied())
}

fn coalition(members: &[usize], gens: Vec<Vec<f64>>) -> NtuCoalition {
    NtuCoalition {
        members: c(members),
        generators: gens,
    }
}

/// Pairs can each secure `pair` to both members; the grand coalition can
/// reach the given corner vectors.
fn pairs_game(pair: f64, corners: Vec<Vec<f64>>) -> NtuGame {
    NtuGame::new(
        3,
        vec![
            coalition(&[0], vec![vec![0.0; 3]]),
            coalition(&[1], vec![vec![0.0; 3]]),
            coalition(&[2], vec![vec![0.0; 3]]),
            coalition(&[0, 1], vec![vec![pair, pair, 0.0]]),
            coalition(&[0, 2], vec![vec![pair, 0.0, pair]]),
            coalition(&[1, 2], vec![vec![0.0, pair, pair]]),
            coalition(&[0, 1, 2], corners),
        ],
    )
    .unwrap()
}

fn empty_core_game() -> NtuGame {
    pairs_game(
        1.0,
        vec![vec![0.9, 0.9, 0.0], vec![0.9, 0.0, 0.9], vec![0.0, 0.9, 0.9]],
    )
}

#[test]
fn balanced_collection_predicate() {
    assert!(is_balanced_collection(&[c(&[0]), c(&[1, 2])], &[1.0, 1.0], 3));
    assert!(is_balanced_collection(
        &[c(&[0, 1]), c(&[0, 2]), c(&[1, 2])],
        &[0.5, 0.5, 0.5],
        3
    ));
    assert!(!is_balanced_collection(&[c(&[0, 1])], &[1.0], 3));
    assert!(!is_balanced_collection(&[c(&[0]), c(&[1])], &[1.0, -1.0], 2));
}

#[test]
fn minimal_balanced_collections() {
    let one = enumerate_balanced_collections(1, 1).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].coalitions, vec![c(&[0])]);

    let two = enumerate_balanced_collections(2, 2).unwrap();
    let shown: Vec<Vec<Coalition>> = two.iter().map(|b| b.coalitions.clone()).collect();
    assert_eq!(shown, vec![vec![c(&[0, 1])], vec![c(&[0]), c(&[1])]]);

    let three = enumerate_balanced_collections(3, 3).unwrap();
    assert_eq!(three.len(), 6);
    let pairs = three
        .iter()
        .find(|b| b.coalitions == vec![c(&[0, 1]), c(&[0, 2]), c(&[1, 2])])
        .unwrap();
    assert!(pairs.weights.iter().all(|&w| (w - 0.5).abs() < 1e-12));

    // Four players have 42 minimal balanced collections.
    assert_eq!(enumerate_balanced_collections(4, 4).unwrap().len(), 42);
    for b in enumerate_balanced_collections(4, 4).unwrap() {
        assert!(is_balanced_collection(&b.coalitions, &b.weights, 4));
    }
    assert!(enumerate_balanced_collections(7, 7).is_err());
}

#[test]
fn single_player_takes_its_autarky_value() {
    let ntu = NtuGame::new(1, vec![coalition(&[0], vec![vec![5.0]])]).unwrap();
    let point = scarf_core_point(&ntu).unwrap();
    assert_eq!(point.payoff, vec![5.0]);
    assert_eq!(brute_force_core(&ntu, 1.0).unwrap(), vec![vec![5.0]]);
}

#[test]
fn symmetric_pairs_with_a_rich_grand_coalition() {
    let ntu = pairs_game(
        1.0,
        vec![vec![3.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 3.0]],
    );
    let point = scarf_core_point(&ntu).unwrap();
    assert!(is_undominated(&ntu, &point.payoff, CORE_TOLERANCE));
    assert!(ntu.achieves(&point.payoff).unwrap().is_some());
    let brute = brute_force_core(&ntu, 0.5).unwrap();
    assert!(brute.contains(&vec![1.0, 1.0, 1.0]));
    let report = check_scarf_conditions(&ntu, &enumerate_balanced_collections(3, 3).unwrap()).unwrap();
    assert!(report.all_hold(), "{report:?}");
}

#[test]
fn symmetric_pairs_with_a_poor_grand_coalition_is_unbalanced() {
    // Corners scaled by 1.5 cannot reach the pairs' common point (1, 1, 1).
    let ntu = pairs_game(
        1.0,
        vec![vec![1.5, 0.0, 0.0], vec![0.0, 1.5, 0.0], vec![0.0, 0.0, 1.5]],
    );
    let report = check_scarf_conditions(&ntu, &enumerate_balanced_collections(3, 3).unwrap()).unwrap();
    assert!(!report.balanced);
    assert!(brute_force_core(&ntu, 0.25).unwrap().is_empty());
}

#[test]
fn empty_core_instance() {
    let ntu = empty_core_game();
    let collections = enumerate_balanced_collections(3, 3).unwrap();
    let report = check_scarf_conditions(&ntu, &collections).unwrap();
    assert!(report.nonempty && report.comprehensive);
    assert!(!report.balanced);
    assert!(brute_force_core(&ntu, 0.1).unwrap().is_empty());
    match scarf_core_point(&ntu) {
        Err(Error::NotAchievable { .. }) | Err(Error::PivotBudget { .. }) => {}
        other => panic!("expected failure, got {other:?}"),
    }
}

#[test]
fn empty_generator_set_fails_the_first_condition() {
    let mut coalitions = empty_core_game().coalitions().to_vec();
    coalitions[3].generators.clear();
    let ntu = NtuGame::new(3, coalitions).unwrap();
    let report = check_scarf_conditions(&ntu, &[]).unwrap();
    assert!(!report.nonempty);
}

#[test]
fn tight_pivot_budget_is_reported() {
    let ntu = pairs_game(
        1.0,
        vec![vec![3.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 3.0]],
    );
    assert!(matches!(
        scarf_core_point_with_budget(&ntu, Some(1)),
        Err(Error::PivotBudget { budget: 1, .. })
    ));
}

/// TU game: each coalition splits `v(S)` on a grid of step `r`.
fn tu_game(values: &[(Vec<usize>, f64)], r: f64) -> NtuGame {
    let n = 3;
    let mut out = Vec::new();
    for (members, v) in values {
        let units = (v / r).round() as usize;
        let mut gens = Vec::new();
        let m: Vec<usize> = members.clone();
        let mut split = vec![0usize; m.len()];
        loop {
            let used: usize = split.iter().take(m.len() - 1).sum();
            if used <= units {
                let mut g = vec![0.0; n];
                for (k, &j) in m.iter().enumerate().take(m.len() - 1) {
                    g[j] = split[k] as f64 * r;
                }
                g[*m.last().unwrap()] = (units - used) as f64 * r;
                gens.push(g);
            }
            // Odometer over all but the last member.
            let mut k = 0;
            while k + 1 < m.len() {
                split[k] += 1;
                if split[k] <= units {
                    break;
                }
                split[k] = 0;
                k += 1;
            }
            if k + 1 >= m.len() {
                break;
            }
        }
        out.push(coalition(members, gens));
    }
    NtuGame::new(n, out).unwrap()
}

#[test]
fn tu_output_lies_in_the_grid_relaxed_core() {
    let values = vec![
        (vec![0], 0.0),
        (vec![1], 0.0),
        (vec![2], 0.0),
        (vec![0, 1], 1.0),
        (vec![0, 2], 1.0),
        (vec![1, 2], 1.0),
        (vec![0, 1, 2], 2.0),
    ];
    let r = 0.25;
    let ntu = tu_game(&values, r);
    let point = scarf_core_point(&ntu).unwrap();
    let u = &point.payoff;
    // With grid splits of step r, an undominated point satisfies
    // Σ_S u ≥ v(S) − (|S| − 1)·r.
    for (members, v) in &values {
        let sum: f64 = members.iter().map(|&j| u[j]).sum();
        assert!(sum >= v - (members.len() as f64 - 1.0) * r - 1e-9, "{members:?}: {u:?}");
    }
    assert!(u.iter().sum::<f64>() <= 2.0 + 1e-9);
}

#[test]
fn pivoting_is_deterministic() {
    let ntu = pairs_game(
        1.0,
        vec![vec![3.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 3.0]],
    );
    assert_eq!(scarf_core_point(&ntu).unwrap(), scarf_core_point(&ntu).unwrap());
}
