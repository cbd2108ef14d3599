//! Existence pipeline on random economies.

use interim_core::derived::{solve, CertificationLevel, SolveOptions};
use interim_core::games::{AffinePiece, Delivery, Economy, Problem, UtilitySpec};
use interim_core::probability::{InformationStructure, Partition, StateSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_partition(rng: &mut ChaCha8Rng, n_states: usize) -> Partition {
    let labels: Vec<usize> = (0..n_states).map(|_| rng.gen_range(0..n_states)).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for l in 0..n_states {
        let b: Vec<usize> = (0..n_states).filter(|&w| labels[w] == l).collect();
        if !b.is_empty() {
            blocks.push(b);
        }
    }
    Partition::new(n_states, blocks).unwrap()
}

fn quarter(rng: &mut ChaCha8Rng, max_quarters: u32) -> f64 {
    rng.gen_range(0..=max_quarters) as f64 / 4.0
}

fn random_economy(rng: &mut ChaCha8Rng) -> Problem {
    let n = rng.gen_range(1..=3);
    let goods = rng.gen_range(1..=2);
    let n_states = rng.gen_range(1..=4);
    let raw: Vec<f64> = (0..n_states).map(|_| rng.gen_range(1..=4) as f64).collect();
    let total: f64 = raw.iter().sum();
    let space = StateSpace::new(
        (0..n_states).map(|w| format!("s{w}")).collect(),
        raw.iter().map(|r| r / total).collect(),
    )
    .unwrap();
    let info = InformationStructure::new((0..n).map(|_| random_partition(rng, n_states)).collect()).unwrap();
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
    let utilities = (0..n)
        .map(|_| {
            let per_state = (0..n_states)
                .map(|_| {
                    (0..rng.gen_range(1..=3))
                        .map(|_| AffinePiece::new((0..goods).map(|_| quarter(rng, 8)).collect(), quarter(rng, 4)))
                        .collect()
                })
                .collect();
            UtilitySpec::new(goods, per_state).unwrap()
        })
        .collect();
    Problem::Economy(Economy::new(space, info, goods, endowments, utilities, delivery).unwrap())
}

#[test]
fn random_economies_have_certified_lifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let options = SolveOptions::default();
    for k in 0..50 {
        let p = random_economy(&mut rng);
        let out = solve(&p, &options).unwrap_or_else(|e| panic!("instance {k}: {e}"));
        assert_ne!(out.certification.level, CertificationLevel::Failed, "instance {k}");
    }
}
