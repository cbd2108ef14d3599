//! The blocking linear program.
//!
//! Decision variables are the coalition's strategy values on the smallest
//! region that contains every conditioning block touching the margin states
//! and is a union of every member's strategy blocks. Outside that region
//! economies fall back to the endowment (always feasible) and games to the
//! status quo; neither affects any required margin.

use std::collections::BTreeSet;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::games::{for_each_assignment, opponent_blocks, CoalitionProfile, Problem, Profile, RegionLayout, Strategy};
use crate::lp::{Cmp, Lp, Var};
use crate::probability::Partition;

/// Margins must exceed this for a block to count.
pub const STRICTNESS: f64 = 1e-9;

pub(crate) struct Query<'a> {
    pub coalition: Coalition,
    /// States at which every member's margin must be positive.
    pub margin_states: &'a [usize],
    /// Conditioning partition for each player (indexed by player).
    pub conditioning: &'a [Partition],
    pub epsilon: f64,
}

pub(crate) struct Solved {
    /// Optimal worst margin of the first phase.
    pub value: f64,
    pub primary: CoalitionProfile,
    /// Same blocking power, pushed away from the boundary where possible.
    pub centered: Option<CoalitionProfile>,
}

struct Layout {
    members: Vec<usize>,
    /// Per member: conditioning blocks touching the margin states.
    cond_blocks: Vec<Vec<Vec<usize>>>,
    region: RegionLayout,
    /// Per member: strategy block index → position in `region.blocks`.
    position: Vec<Vec<Option<usize>>>,
}

fn layout(problem: &Problem, q: &Query<'_>) -> Layout {
    let members: Vec<usize> = q.coalition.members().collect();
    let mut region: BTreeSet<usize> = BTreeSet::new();
    let cond_blocks: Vec<Vec<Vec<usize>>> = members
        .iter()
        .map(|&i| {
            let c = &q.conditioning[i];
            let mut ks: Vec<usize> = q.margin_states.iter().map(|&w| c.block_of(w)).collect();
            ks.sort_unstable();
            ks.dedup();
            ks.into_iter()
                .map(|k| {
                    let b = c.block(k).to_vec();
                    region.extend(b.iter().copied());
                    b
                })
                .collect()
        })
        .collect();
    loop {
        let before = region.len();
        for &i in &members {
            let p = problem.strategy_partition(i);
            let touched: Vec<usize> = region.iter().map(|&w| p.block_of(w)).collect();
            for b in touched {
                region.extend(p.block(b).iter().copied());
            }
        }
        if region.len() == before {
            break;
        }
    }
    let states: Vec<usize> = region.into_iter().collect();
    let region = RegionLayout::new(problem, q.coalition, &states);
    let position = members
        .iter()
        .zip(&region.blocks)
        .map(|(&i, bs)| {
            let mut pos = vec![None; problem.strategy_partition(i).len()];
            for (k, &b) in bs.iter().enumerate() {
                pos[b] = Some(k);
            }
            pos
        })
        .collect();
    Layout {
        members,
        cond_blocks,
        region,
        position,
    }
}

enum Phase {
    /// Maximize the worst margin.
    Max,
    /// Maximize the smallest of margins and positive-capacity coordinates.
    Center,
}

struct Built {
    lp: Lp,
    objective: Var,
    /// `[member][region block][coordinate]`: bundle goods or vertex weights.
    vars: Vec<Vec<Vec<Var>>>,
}

fn build_economy(problem: &Problem, q: &Query<'_>, l: &Layout, status_quo: &[Vec<f64>], phase: Phase) -> Built {
    let econ = problem.as_economy().expect("economy");
    let goods = econ.goods();
    let space = problem.space();
    let mut lp = Lp::maximize();
    let objective = lp.free(1.0);
    let mut vars = Vec::with_capacity(l.members.len());
    for (k, &i) in l.members.iter().enumerate() {
        let p = problem.strategy_partition(i);
        let mut per_block = Vec::with_capacity(l.region.blocks[k].len());
        for &b in &l.region.blocks[k] {
            let coords: Vec<Var> = (0..goods)
                .map(|g| {
                    let v = lp.var(0.0, 0.0, f64::INFINITY);
                    if matches!(phase, Phase::Center) {
                        let cap = p
                            .block(b)
                            .iter()
                            .map(|&w| econ.coalition_total(q.coalition, w, g))
                            .fold(f64::INFINITY, f64::min);
                        if cap > STRICTNESS {
                            lp.constraint(&[(v, 1.0), (objective, -1.0)], Cmp::Ge, 0.0);
                        }
                    }
                    v
                })
                .collect();
            per_block.push(coords);
        }
        vars.push(per_block);
    }
    let var_at = |k: usize, w: usize, g: usize| -> Var {
        let b = problem.strategy_partition(l.members[k]).block_of(w);
        vars[k][l.position[k][b].expect("state in region")][g]
    };
    // Resource balance on the region.
    let mut states: BTreeSet<usize> = BTreeSet::new();
    for (k, &i) in l.members.iter().enumerate() {
        for &b in &l.region.blocks[k] {
            states.extend(problem.strategy_partition(i).block(b).iter().copied());
        }
    }
    for &w in &states {
        for g in 0..goods {
            let terms: Vec<(Var, f64)> = (0..l.members.len()).map(|k| (var_at(k, w, g), 1.0)).collect();
            lp.constraint(&terms, Cmp::Eq, econ.coalition_total(q.coalition, w, g));
        }
    }
    // Hypographs and margins.
    for (k, &i) in l.members.iter().enumerate() {
        let u = problem.utility(i);
        for block in &l.cond_blocks[k] {
            let mass = space.mass(block);
            let mut margin: Vec<(Var, f64)> = Vec::with_capacity(block.len() + 1);
            for &w in block {
                let h = lp.free(0.0);
                for piece in u.pieces(w) {
                    let mut terms = vec![(h, 1.0)];
                    terms.extend(piece.coef.iter().enumerate().map(|(g, &c)| (var_at(k, w, g), -c)));
                    lp.constraint(&terms, Cmp::Le, piece.intercept);
                }
                margin.push((h, space.weight(w) / mass));
            }
            margin.push((objective, -1.0));
            lp.constraint(&margin, Cmp::Ge, status_quo[i][block[0]] + q.epsilon);
        }
    }
    Built { lp, objective, vars }
}

fn build_game(problem: &Problem, q: &Query<'_>, l: &Layout, status_quo: &[Vec<f64>]) -> Result<Built> {
    let game = problem.as_game().expect("game");
    let space = problem.space();
    let mut lp = Lp::maximize();
    let objective = lp.free(1.0);
    let mut vars = Vec::with_capacity(l.members.len());
    for (k, &i) in l.members.iter().enumerate() {
        let nv = game.action_set(i).vertices().len();
        let mut per_block = Vec::new();
        for _ in &l.region.blocks[k] {
            let weights: Vec<Var> = (0..nv).map(|_| lp.var(0.0, 0.0, 1.0)).collect();
            let terms: Vec<(Var, f64)> = weights.iter().map(|&v| (v, 1.0)).collect();
            lp.constraint(&terms, Cmp::Eq, 1.0);
            per_block.push(weights);
        }
        vars.push(per_block);
    }
    for (k, &i) in l.members.iter().enumerate() {
        let u = problem.utility(i);
        for block in &l.cond_blocks[k] {
            let mass = space.mass(block);
            let opponents = opponent_blocks(problem, q.coalition, block);
            let mut failure = None;
            for_each_assignment(game, &opponents, |digits| {
                let mut margin: Vec<(Var, f64)> = Vec::with_capacity(block.len() + 1);
                for &w in block {
                    let h = lp.free(0.0);
                    for piece in u.pieces(w) {
                        let mut terms = vec![(h, 1.0)];
                        let mut rhs = piece.intercept;
                        for j in 0..problem.n_players() {
                            let off = game.offset(j);
                            let d = game.action_set(j).dim();
                            let coef = &piece.coef[off..off + d];
                            match l.members.iter().position(|&m| m == j) {
                                Some(kj) => {
                                    let b = problem.strategy_partition(j).block_of(w);
                                    let Some(pos) = l.position[kj][b] else {
                                        failure = Some(j);
                                        continue;
                                    };
                                    for (vi, vertex) in game.action_set(j).vertices().iter().enumerate() {
                                        let c: f64 = coef.iter().zip(vertex).map(|(a, b)| a * b).sum();
                                        if c != 0.0 {
                                            terms.push((vars[kj][pos][vi], -c));
                                        }
                                    }
                                }
                                None => {
                                    let b = problem.strategy_partition(j).block_of(w);
                                    let slot = opponents
                                        .iter()
                                        .position(|&(pj, pb)| pj == j && pb == b)
                                        .expect("opponent block listed");
                                    let vertex = &game.action_set(j).vertices()[digits[slot]];
                                    rhs += coef.iter().zip(vertex).map(|(a, b)| a * b).sum::<f64>();
                                }
                            }
                        }
                        lp.constraint(&terms, Cmp::Le, rhs);
                    }
                    margin.push((h, space.weight(w) / mass));
                }
                margin.push((objective, -1.0));
                lp.constraint(&margin, Cmp::Ge, status_quo[i][block[0]] + q.epsilon);
            })?;
            if let Some(j) = failure {
                return Err(Error::Lp(format!("player {} has no region variables", j + 1)));
            }
        }
    }
    Ok(Built { lp, objective, vars })
}

fn extract(problem: &Problem, x: &Profile, l: &Layout, built: &Built, solution: &crate::lp::LpSolution) -> CoalitionProfile {
    let coalition = Coalition::from_members(l.members.iter().copied());
    let strategies = l
        .members
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let p = problem.strategy_partition(i);
            let values = (0..p.len())
                .map(|b| match l.position[k][b] {
                    Some(pos) => {
                        let raw: Vec<f64> = built.vars[k][pos].iter().map(|&v| solution.value(v)).collect();
                        match problem {
                            Problem::Economy(_) => raw.into_iter().map(|v| clean(v.max(0.0))).collect(),
                            Problem::Game(g) => {
                                let weights: Vec<f64> = raw.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
                                g.action_set(i).combine(&weights).into_iter().map(clean).collect()
                            }
                        }
                    }
                    None => match problem {
                        Problem::Economy(e) => e.endowment(i, p.block(b)[0]).to_vec(),
                        Problem::Game(_) => x.strategy(i).values[b].clone(),
                    },
                })
                .collect();
            Strategy {
                partition: p.clone(),
                values,
            }
        })
        .collect();
    CoalitionProfile {
        coalition,
        strategies,
    }
}

/// Rounds away solver noise below 1e-12 relative to the nearest multiple of 2^-40.
fn clean(v: f64) -> f64 {
    let scale = (1u64 << 40) as f64;
    let snapped = (v * scale).round() / scale;
    if (snapped - v).abs() < 1e-12 {
        snapped
    } else {
        v
    }
}

pub(crate) fn solve(problem: &Problem, x: &Profile, q: &Query<'_>, status_quo: &[Vec<f64>]) -> Result<Option<Solved>> {
    let l = layout(problem, q);
    let built = match problem {
        Problem::Economy(_) => build_economy(problem, q, &l, status_quo, Phase::Max),
        Problem::Game(_) => build_game(problem, q, &l, status_quo)?,
    };
    let Some(solution) = built.lp.solve()? else {
        return Ok(None);
    };
    let value = solution.value(built.objective);
    if value <= STRICTNESS {
        return Ok(None);
    }
    let primary = extract(problem, x, &l, &built, &solution);
    let centered = match problem {
        Problem::Economy(_) => {
            let c = build_economy(problem, q, &l, status_quo, Phase::Center);
            match c.lp.solve()? {
                Some(s) if s.value(c.objective) > STRICTNESS => Some(extract(problem, x, &l, &c, &s)),
                _ => None,
            }
        }
        Problem::Game(_) => None,
    };
    Ok(Some(Solved {
        value,
        primary,
        centered,
    }))
}
