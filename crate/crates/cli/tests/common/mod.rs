//! Random instances shared by the integration tests.
#![allow(dead_code)]

use interim_core::games::{ActionSet, AffinePiece, Delivery, Economy, NormalFormGame, Problem, UtilitySpec};
use interim_core::probability::{InformationStructure, Partition, StateSpace};
use interim_core::scarf::{NtuCoalition, NtuGame};
use interim_core::Coalition;
use itertools::Itertools;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_partition(rng: &mut ChaCha8Rng, n_states: usize) -> Partition {
    let labels: Vec<usize> = (0..n_states).map(|_| rng.gen_range(0..n_states)).collect();
    let blocks = (0..n_states)
        .map(|l| (0..n_states).filter(|&w| labels[w] == l).collect::<Vec<_>>())
        .filter(|b| !b.is_empty())
        .collect();
    Partition::new(n_states, blocks).unwrap()
}

pub fn quarter(rng: &mut ChaCha8Rng, max_quarters: u32) -> f64 {
    rng.gen_range(0..=max_quarters) as f64 / 4.0
}

pub fn random_space(rng: &mut ChaCha8Rng, n_states: usize) -> StateSpace {
    let raw: Vec<f64> = (0..n_states).map(|_| rng.gen_range(1..=4) as f64).collect();
    let total: f64 = raw.iter().sum();
    StateSpace::new(
        (0..n_states).map(|w| format!("s{w}")).collect(),
        raw.iter().map(|r| r / total).collect(),
    )
    .unwrap()
}

/// Concave PWL utility: the minimum of 1–3 affine pieces per state.
pub fn random_utility(rng: &mut ChaCha8Rng, dim: usize, n_states: usize) -> UtilitySpec {
    let per_state = (0..n_states)
        .map(|_| {
            (0..rng.gen_range(1..=3))
                .map(|_| AffinePiece::new((0..dim).map(|_| quarter(rng, 8)).collect(), quarter(rng, 4)))
                .collect()
        })
        .collect();
    UtilitySpec::new(dim, per_state).unwrap()
}

pub struct EconomyShape {
    pub max_players: usize,
    pub max_goods: usize,
    pub max_states: usize,
    pub trivial_information: bool,
}

/// Quarter-grid endowments in `[0, 1]`, measurable for the delivery stage.
pub fn random_economy(rng: &mut ChaCha8Rng, shape: &EconomyShape) -> Problem {
    let n = rng.gen_range(1..=shape.max_players);
    let goods = rng.gen_range(1..=shape.max_goods);
    let n_states = rng.gen_range(1..=shape.max_states);
    let space = random_space(rng, n_states);
    let partitions = (0..n)
        .map(|_| {
            if shape.trivial_information {
                Partition::trivial(n_states)
            } else {
                random_partition(rng, n_states)
            }
        })
        .collect();
    let info = InformationStructure::new(partitions).unwrap();
    let delivery = if rng.gen_bool(0.5) { Delivery::Interim } else { Delivery::ExPost };
    let endowments = (0..n)
        .map(|i| {
            let p = match delivery {
                Delivery::Interim => info.partition(i).clone(),
                Delivery::ExPost => info.join().clone(),
            };
            let per_block: Vec<Vec<f64>> = (0..p.len()).map(|_| (0..goods).map(|_| quarter(rng, 4)).collect()).collect();
            (0..n_states).map(|w| per_block[p.block_of(w)].clone()).collect()
        })
        .collect();
    let utilities = (0..n).map(|_| random_utility(rng, goods, n_states)).collect();
    Problem::Economy(Economy::new(space, info, goods, endowments, utilities, delivery).unwrap())
}

/// Two or three players with interval actions `[0, 1]` and random PWL
/// utilities of the joint action.
pub fn random_game(rng: &mut ChaCha8Rng, max_states: usize, trivial_information: bool) -> Problem {
    let n = rng.gen_range(2..=3);
    let n_states = rng.gen_range(1..=max_states);
    let space = random_space(rng, n_states);
    let partitions = (0..n)
        .map(|_| {
            if trivial_information {
                Partition::trivial(n_states)
            } else {
                random_partition(rng, n_states)
            }
        })
        .collect();
    let info = InformationStructure::new(partitions).unwrap();
    let actions = vec![ActionSet::new(vec![vec![0.0], vec![1.0]]).unwrap(); n];
    let utilities = (0..n)
        .map(|_| {
            let per_state = (0..n_states)
                .map(|_| {
                    (0..rng.gen_range(1..=2))
                        .map(|_| {
                            let coef = (0..n).map(|_| quarter(rng, 8) - 1.0).collect();
                            AffinePiece::new(coef, quarter(rng, 4))
                        })
                        .collect()
                })
                .collect();
            UtilitySpec::new(n, per_state).unwrap()
        })
        .collect();
    let delivery = if rng.gen_bool(0.5) { Delivery::Interim } else { Delivery::ExPost };
    Problem::Game(NormalFormGame::new(space, info, actions, utilities, delivery).unwrap())
}

/// A linear exchange market as an NTU game: coalition `S`'s generators are
/// the payoffs of handing each good of the pooled endowment wholly to one
/// member (`|S|^goods ≤ 6` vertices). Non-grand coalitions keep a random
/// nonempty subset of their generators, and non-singleton, non-grand
/// coalitions may be dropped. Such games are balanced.
pub fn random_market_game(rng: &mut ChaCha8Rng) -> NtuGame {
    let (n, goods) = match rng.gen_range(0..4) {
        0 => (2, 1),
        1 => (2, 2),
        2 => (3, 1),
        _ => (4, 1),
    };
    let endowment: Vec<Vec<f64>> = (0..n).map(|_| (0..goods).map(|_| quarter(rng, 4)).collect()).collect();
    let weights: Vec<Vec<f64>> = (0..n).map(|_| (0..goods).map(|_| quarter(rng, 8)).collect()).collect();
    let mut coalitions = Vec::new();
    for s in Coalition::all_nonempty(n) {
        let grand = s == Coalition::grand(n);
        if !grand && s.len() > 1 && rng.gen_bool(0.3) {
            continue;
        }
        let members: Vec<usize> = s.members().collect();
        let pool: Vec<f64> = (0..goods).map(|g| members.iter().map(|&i| endowment[i][g]).sum()).collect();
        let mut generators: Vec<Vec<f64>> = (0..goods)
            .map(|_| members.iter().copied())
            .multi_cartesian_product()
            .map(|owners| {
                let mut payoff = vec![0.0; n];
                for (g, &i) in owners.iter().enumerate() {
                    payoff[i] += weights[i][g] * pool[g];
                }
                payoff
            })
            .collect();
        if !grand {
            let keep: Vec<bool> = (0..generators.len()).map(|_| rng.gen_bool(0.6)).collect();
            let first = rng.gen_range(0..generators.len());
            let mut k = 0;
            generators.retain(|_| {
                let kept = keep[k] || k == first;
                k += 1;
                kept
            });
        }
        coalitions.push(NtuCoalition { members: s, generators });
    }
    NtuGame::new(n, coalitions).unwrap()
}

/// Three players; pairs get `(1, 1)`, the grand coalition only its three
/// corners `0.9` — every balanced payoff is out of reach.
pub fn empty_core_game() -> NtuGame {
    let c = |m: &[usize], g: Vec<Vec<f64>>| NtuCoalition {
        members: Coalition::from_members(m.iter().copied()),
        generators: g,
    };
    NtuGame::new(
        3,
        vec![
            c(&[0], vec![vec![0.0; 3]]),
            c(&[1], vec![vec![0.0; 3]]),
            c(&[2], vec![vec![0.0; 3]]),
            c(&[0, 1], vec![vec![1.0, 1.0, 0.0]]),
            c(&[0, 2], vec![vec![1.0, 0.0, 1.0]]),
            c(&[1, 2], vec![vec![0.0, 1.0, 1.0]]),
            c(&[0, 1, 2], vec![vec![0.9, 0.9, 0.0], vec![0.9, 0.0, 0.9], vec![0.0, 0.9, 0.9]]),
        ],
    )
    .unwrap()
}
