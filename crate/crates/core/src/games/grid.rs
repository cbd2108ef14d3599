use super::{Problem, Profile, Strategy};
use crate::coalition::Coalition;
use crate::error::{Error, Result};

const GRID_SLACK: f64 = 1e-12;

/// The strategy blocks of a coalition's members that lie inside a region
/// (a union of blocks of every member's strategy partition).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RegionLayout {
    pub members: Vec<usize>,
    /// Per member: indices of strategy blocks meeting the region.
    pub blocks: Vec<Vec<usize>>,
}

impl RegionLayout {
    pub fn new(problem: &Problem, coalition: Coalition, region: &[usize]) -> Self {
        let members: Vec<usize> = coalition.members().collect();
        let blocks = members
            .iter()
            .map(|&i| {
                let p = problem.strategy_partition(i);
                let mut bs: Vec<usize> = region.iter().map(|&w| p.block_of(w)).collect();
                bs.sort_unstable();
                bs.dedup();
                bs
            })
            .collect();
        RegionLayout { members, blocks }
    }
}

fn check_resolution(resolution: f64) -> Result<()> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "grid resolution must be positive, got {resolution}"
        )));
    }
    Ok(())
}

/// Every grid allocation of the coalition's resources on the region.
///
/// Non-absorbing coordinates range over multiples of `resolution` up to the
/// coordinate's capacity (plus the capacity itself); the member with the
/// most blocks absorbs the residual, which must be nonnegative and constant
/// on its blocks. Output is indexed `[allocation][member][block][good]`.
pub(crate) fn economy_grid(
    problem: &Problem,
    layout: &RegionLayout,
    resolution: f64,
    budget: usize,
) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
    check_resolution(resolution)?;
    let econ = problem
        .as_economy()
        .ok_or_else(|| Error::Unsupported("economy grid on a game".into()))?;
    let goods = econ.goods();
    let coalition = Coalition::from_members(layout.members.iter().copied());
    let n_states = problem.n_states();
    let total = |w: usize, g: usize| econ.coalition_total(coalition, w, g);

    let absorber = (0..layout.members.len())
        .rev()
        .max_by_key(|&k| layout.blocks[k].len())
        .ok_or(Error::EmptyCoalition)?;

    struct Coord {
        member: usize,
        block: usize,
        good: usize,
        states: Vec<usize>,
        values: Vec<f64>,
    }
    let mut coords = Vec::new();
    for (k, &i) in layout.members.iter().enumerate() {
        if k == absorber {
            continue;
        }
        let p = problem.strategy_partition(i);
        for (bpos, &b) in layout.blocks[k].iter().enumerate() {
            let states = p.block(b).to_vec();
            for g in 0..goods {
                let cap = states.iter().map(|&w| total(w, g)).fold(f64::INFINITY, f64::min);
                let mut values = Vec::new();
                let mut step = 0u64;
                loop {
                    let v = step as f64 * resolution;
                    if v > cap + GRID_SLACK {
                        break;
                    }
                    values.push(v.min(cap));
                    step += 1;
                }
                if values.last().is_none_or(|&v| (v - cap).abs() > GRID_SLACK) {
                    values.push(cap.max(0.0));
                }
                coords.push(Coord {
                    member: k,
                    block: bpos,
                    good: g,
                    states: states.clone(),
                    values,
                });
            }
        }
    }
    let estimate: u128 = coords
        .iter()
        .map(|c| c.values.len() as u128)
        .fold(1u128, |a, b| a.saturating_mul(b));

    let shape: Vec<Vec<Vec<f64>>> = layout
        .blocks
        .iter()
        .map(|bs| vec![vec![0.0; goods]; bs.len()])
        .collect();
    let absorber_player = layout.members[absorber];
    let absorber_blocks: Vec<Vec<usize>> = layout.blocks[absorber]
        .iter()
        .map(|&b| problem.strategy_partition(absorber_player).block(b).to_vec())
        .collect();

    let mut out = Vec::new();
    let mut partial = vec![vec![0.0; goods]; n_states];
    let mut current = shape;
    let mut choice = vec![0usize; coords.len()];
    let mut depth = 0usize;
    // Iterative backtracking; `choice[d]` is the next value index to try.
    loop {
        if depth == coords.len() {
            // Leaf: fill the absorber.
            let mut ok = true;
            'fill: for (bpos, states) in absorber_blocks.iter().enumerate() {
                for g in 0..goods {
                    let residuals: Vec<f64> = states.iter().map(|&w| total(w, g) - partial[w][g]).collect();
                    let lo = residuals.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    if lo < -GRID_SLACK || hi - lo > super::FEASIBILITY_TOLERANCE {
                        ok = false;
                        break 'fill;
                    }
                    current[absorber][bpos][g] = residuals[0].max(0.0);
                }
            }
            if ok {
                if out.len() >= budget {
                    return Err(Error::BudgetExceeded {
                        what: "grid allocations",
                        estimate,
                        budget,
                    });
                }
                out.push(current.clone());
            }
            if depth == 0 {
                break;
            }
            depth -= 1;
            let c = &coords[depth];
            let v = current[c.member][c.block][c.good];
            for &w in &c.states {
                partial[w][c.good] -= v;
            }
            continue;
        }
        let c = &coords[depth];
        if choice[depth] >= c.values.len() {
            choice[depth] = 0;
            if depth == 0 {
                break;
            }
            depth -= 1;
            let c = &coords[depth];
            let v = current[c.member][c.block][c.good];
            for &w in &c.states {
                partial[w][c.good] -= v;
            }
            continue;
        }
        let v = c.values[choice[depth]];
        choice[depth] += 1;
        if c.states.iter().any(|&w| partial[w][c.good] + v > total(w, c.good) + GRID_SLACK) {
            // Values are increasing: nothing further fits either.
            choice[depth] = c.values.len();
            continue;
        }
        for &w in &c.states {
            partial[w][c.good] += v;
        }
        current[c.member][c.block][c.good] = v;
        depth += 1;
    }
    Ok(out)
}

fn compositions(m: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=m).rev() {
            prefix.push(k);
            rec(m - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, parts, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, t| acc.saturating_mul(n - t) / (t + 1))
}

/// Every grid strategy of the coalition's members on the region: mixtures
/// of action-set vertices with weights in multiples of `1/m`,
/// `m = round(1/resolution)`. Indexed `[profile][member][block][coordinate]`.
pub(crate) fn game_grid(
    problem: &Problem,
    layout: &RegionLayout,
    resolution: f64,
    budget: usize,
) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
    check_resolution(resolution)?;
    let game = problem
        .as_game()
        .ok_or_else(|| Error::Unsupported("game grid on an economy".into()))?;
    let m = (1.0 / resolution).round().max(1.0) as usize;
    let mut slots: Vec<(usize, usize, Vec<Vec<f64>>)> = Vec::new();
    let mut estimate: u128 = 1;
    for (k, &i) in layout.members.iter().enumerate() {
        let set = game.action_set(i);
        let nv = set.vertices().len();
        let count = binomial((m + nv - 1) as u128, (nv - 1) as u128);
        for bpos in 0..layout.blocks[k].len() {
            estimate = estimate.saturating_mul(count);
            slots.push((k, bpos, Vec::new()));
        }
    }
    if estimate > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "grid strategies",
            estimate,
            budget,
        });
    }
    for (k, _, actions) in slots.iter_mut() {
        let set = game.action_set(layout.members[*k]);
        *actions = compositions(m, set.vertices().len())
            .into_iter()
            .map(|c| {
                let w: Vec<f64> = c.iter().map(|&x| x as f64 / m as f64).collect();
                set.combine(&w)
            })
            .collect();
    }
    let mut out = Vec::with_capacity(estimate as usize);
    let mut digits = vec![0usize; slots.len()];
    let template: Vec<Vec<Vec<f64>>> = layout.blocks.iter().map(|bs| vec![Vec::new(); bs.len()]).collect();
    loop {
        let mut current = template.clone();
        for (d, (k, bpos, actions)) in digits.iter().zip(&slots) {
            current[*k][*bpos] = actions[*d].clone();
        }
        out.push(current);
        let mut carry = true;
        for (d, (_, _, actions)) in digits.iter_mut().zip(&slots) {
            *d += 1;
            if *d < actions.len() {
                carry = false;
                break;
            }
            *d = 0;
        }
        if carry {
            break;
        }
    }
    Ok(out)
}

/// All grid profiles of the grand coalition at the given resolution.
///
/// For economies these are the feasible allocations whose non-absorbing
/// coordinates are multiples of `resolution` (or hit their capacity); for
/// games, mixtures of action vertices with weights in multiples of
/// `resolution`. Fails with a budget error (carrying a size estimate) rather
/// than producing more than `budget` profiles.
pub fn profile_grid(problem: &Problem, resolution: f64, budget: usize) -> Result<Vec<Profile>> {
    problem.ensure_valid()?;
    let all: Vec<usize> = (0..problem.n_states()).collect();
    let layout = RegionLayout::new(problem, problem.grand_coalition(), &all);
    let raw = match problem {
        Problem::Economy(_) => economy_grid(problem, &layout, resolution, budget)?,
        Problem::Game(_) => game_grid(problem, &layout, resolution, budget)?,
    };
    raw.into_iter()
        .map(|per_member| {
            let strategies = per_member
                .into_iter()
                .enumerate()
                .map(|(i, values)| Strategy::new(problem.strategy_partition(i).clone(), values))
                .collect::<Result<Vec<_>>>()?;
            Profile::new(problem, strategies)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_count_matches_stars_and_bars() {
        assert_eq!(compositions(4, 3).len(), 15);
        assert_eq!(binomial(6, 2), 15);
        assert!(compositions(3, 2).iter().all(|c| c.iter().sum::<usize>() == 3));
    }
}
