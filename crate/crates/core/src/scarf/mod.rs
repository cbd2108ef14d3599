//! Finitely generated NTU games, balanced collections and Scarf's algorithm.
//!
//! `V(S)` is the comprehensive hull of finitely many generators on the
//! `S`-coordinates. A point `v` is dominated by `S` when some generator
//! exceeds it by more than the tolerance on every member of `S`.
//! Coalitions absent from the game impose nothing.

mod pivot;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::lp::{Cmp, Lp};

/// Domination and achievability tolerance.
pub const CORE_TOLERANCE: f64 = 1e-9;

/// Balancing-weight tolerance.
pub const BALANCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NtuCoalition {
    pub members: Coalition,
    /// Payoff vectors of length `players`; only member coordinates matter.
    pub generators: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NtuGame {
    players: usize,
    coalitions: Vec<NtuCoalition>,
}

impl NtuGame {
    pub fn new(players: usize, coalitions: Vec<NtuCoalition>) -> Result<Self> {
        if players == 0 || players >= crate::coalition::MAX_PLAYERS {
            return Err(Error::InvalidProblem(format!("unsupported player count {players}")));
        }
        let grand = Coalition::grand(players);
        let mut seen = std::collections::HashSet::new();
        for c in &coalitions {
            if c.members.is_empty() || !c.members.is_subset(grand) {
                return Err(Error::InvalidProblem(format!("coalition {} is out of range", c.members)));
            }
            if !seen.insert(c.members) {
                return Err(Error::InvalidProblem(format!("coalition {} listed twice", c.members)));
            }
            if let Some(g) = c.generators.iter().find(|g| g.len() != players) {
                return Err(Error::Dimension {
                    expected: players,
                    found: g.len(),
                });
            }
            if c.generators.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidProblem("non-finite generator".into()));
            }
        }
        Ok(NtuGame { players, coalitions })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn coalitions(&self) -> &[NtuCoalition] {
        &self.coalitions
    }

    pub fn coalition(&self, s: Coalition) -> Option<&NtuCoalition> {
        self.coalitions.iter().find(|c| c.members == s)
    }

    pub fn total_generators(&self) -> usize {
        self.coalitions.iter().map(|c| c.generators.len()).sum()
    }

    /// Default pivot budget `10·|J|·G²`.
    pub fn default_pivot_budget(&self) -> usize {
        let g = self.total_generators().max(1);
        10usize.saturating_mul(self.players).saturating_mul(g).saturating_mul(g)
    }

    /// Is `v` in the convex hull of the grand coalition's generators, minus
    /// the nonnegative orthant? Returns the convex weights if so.
    pub fn achieves(&self, v: &[f64]) -> Result<Option<Vec<f64>>> {
        let Some(grand) = self.coalition(Coalition::grand(self.players)) else {
            return Ok(None);
        };
        if grand.generators.is_empty() {
            return Ok(None);
        }
        let mut lp = Lp::maximize();
        let weights: Vec<_> = grand.generators.iter().map(|_| lp.var(0.0, 0.0, 1.0)).collect();
        let terms: Vec<_> = weights.iter().map(|&w| (w, 1.0)).collect();
        lp.constraint(&terms, Cmp::Eq, 1.0);
        for j in 0..self.players {
            let terms: Vec<_> = weights
                .iter()
                .zip(&grand.generators)
                .map(|(&w, g)| (w, g[j]))
                .collect();
            lp.constraint(&terms, Cmp::Ge, v[j] - CORE_TOLERANCE);
        }
        Ok(lp
            .solve()?
            .map(|s| weights.iter().map(|&w| s.value(w).max(0.0)).collect()))
    }
}

/// True iff no coalition has a generator exceeding `v` by more than `tol`
/// on all of its members.
pub fn is_undominated(ntu: &NtuGame, v: &[f64], tol: f64) -> bool {
    dominating(ntu, v, tol).is_none()
}

/// The first `(coalition index, generator index)` dominating `v`.
pub fn dominating(ntu: &NtuGame, v: &[f64], tol: f64) -> Option<(usize, usize)> {
    ntu.coalitions.iter().enumerate().find_map(|(c, co)| {
        co.generators
            .iter()
            .position(|g| co.members.members().all(|j| g[j] > v[j] + tol))
            .map(|g| (c, g))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedCollection {
    pub coalitions: Vec<Coalition>,
    pub weights: Vec<f64>,
}

pub fn is_balanced_collection(coalitions: &[Coalition], weights: &[f64], players: usize) -> bool {
    if coalitions.len() != weights.len() || weights.iter().any(|&w| w.is_nan() || w <= 0.0) {
        return false;
    }
    (0..players).all(|j| {
        let total: f64 = coalitions
            .iter()
            .zip(weights)
            .filter(|(s, _)| s.contains(j))
            .map(|(_, w)| w)
            .sum();
        (total - 1.0).abs() <= BALANCE_TOLERANCE
    })
        && coalitions.iter().all(|s| s.is_subset(Coalition::grand(players)))
}

/// Solves `Σ_{S∋j} δ_S = 1` for linearly independent coalitions; `None`
/// when the system has no exact solution.
fn balancing_weights(coalitions: &[Coalition], players: usize) -> Option<Vec<f64>> {
    let k = coalitions.len();
    // Augmented matrix rows = players, columns = coalitions + rhs.
    let mut a: Vec<Vec<f64>> = (0..players)
        .map(|j| {
            let mut row: Vec<f64> = coalitions.iter().map(|s| s.contains(j) as u8 as f64).collect();
            row.push(1.0);
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(k);
    for col in 0..k {
        let r = (pivot_row..players).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[r][col].abs() < 1e-12 {
            return None;
        }
        a.swap(pivot_row, r);
        let p = a[pivot_row][col];
        for v in a[pivot_row].iter_mut() {
            *v /= p;
        }
        let pivot = a[pivot_row].clone();
        for (row, values) in a.iter_mut().enumerate() {
            let f = values[col];
            if row != pivot_row && f != 0.0 {
                for (v, q) in values.iter_mut().zip(&pivot) {
                    *v -= f * q;
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if (pivot_row..players).any(|r| a[r][k].abs() > 1e-9) {
        return None;
    }
    Some(pivots.iter().map(|&r| a[r][k]).collect())
}

fn rank(coalitions: &[Coalition], players: usize) -> usize {
    let mut rows: Vec<Vec<f64>> = coalitions
        .iter()
        .map(|s| (0..players).map(|j| s.contains(j) as u8 as f64).collect())
        .collect();
    let mut r = 0;
    for col in 0..players {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col].abs() > 1e-12) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            if i != r && f != 0.0 {
                for (v, q) in row.iter_mut().zip(&pivot) {
                    *v -= f * q;
                }
            }
        }
        r += 1;
    }
    r
}

/// Largest subset count the enumeration is willing to visit.
const COLLECTION_SEARCH_LIMIT: u128 = 5_000_000;

/// All minimal balanced collections with at most `max_size` coalitions.
///
/// Minimal balanced collections are exactly the balanced collections whose
/// incidence vectors are linearly independent; weights are then unique.
/// Ordered by size, then by the canonical order of their coalitions.
pub fn enumerate_balanced_collections(players: usize, max_size: usize) -> Result<Vec<BalancedCollection>> {
    if players == 0 || players > 6 {
        return Err(Error::BudgetExceeded {
            what: "balanced collection enumeration",
            estimate: players as u128,
            budget: 6,
        });
    }
    let all = Coalition::all_nonempty(players);
    let max_size = max_size.min(players);
    let estimate: u128 = (1..=max_size)
        .map(|k| (0..k).fold(1u128, |acc, t| acc * (all.len() - t) as u128 / (t as u128 + 1)))
        .sum();
    if estimate > COLLECTION_SEARCH_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "balanced collection enumeration",
            estimate,
            budget: COLLECTION_SEARCH_LIMIT as usize,
        });
    }
    let mut out = Vec::new();
    for size in 1..=max_size {
        for combo in all.iter().copied().combinations(size) {
            if rank(&combo, players) != size {
                continue;
            }
            if let Some(w) = balancing_weights(&combo, players) {
                if w.iter().all(|&d| d > BALANCE_TOLERANCE) {
                    out.push(BalancedCollection {
                        coalitions: combo,
                        weights: w,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionsReport {
    /// Every coalition present has a generator, and every singleton is present.
    pub nonempty: bool,
    /// Finite generator sets, so the hulls are closed and comprehensive and
    /// the grand coalition's set is bounded above.
    pub comprehensive: bool,
    /// Every tested intersection point lies in the grand coalition's set.
    pub balanced: bool,
    pub collections_tested: usize,
    pub points_tested: usize,
    pub failures: Vec<String>,
}

impl ConditionsReport {
    pub fn all_hold(&self) -> bool {
        self.nonempty && self.comprehensive && self.balanced
    }
}

/// Intersection points per collection explored by the balancedness check.
const INTERSECTION_POINT_LIMIT: usize = 20_000;

/// Structural hypotheses plus an empirical balancedness check: for each
/// given collection, every maximal point of `∩_S V(S)` built from one
/// generator per coalition must be achievable by the grand coalition.
/// Coalitions absent from the game contribute the zero vector.
pub fn check_scarf_conditions(ntu: &NtuGame, collections: &[BalancedCollection]) -> Result<ConditionsReport> {
    let mut failures = Vec::new();
    let mut nonempty = true;
    for c in &ntu.coalitions {
        if c.generators.is_empty() {
            nonempty = false;
            failures.push(format!("V({}) has no generator", c.members));
        }
    }
    for j in 0..ntu.players {
        if ntu.coalition(Coalition::singleton(j)).is_none() {
            nonempty = false;
            failures.push(format!("singleton {} is missing", Coalition::singleton(j)));
        }
    }
    let grand_ok = ntu
        .coalition(Coalition::grand(ntu.players))
        .is_some_and(|g| !g.generators.is_empty());
    if !grand_ok {
        nonempty = false;
        failures.push("the grand coalition has no generator".into());
    }
    let comprehensive = ntu.coalitions.iter().flat_map(|c| &c.generators).flatten().all(|v| v.is_finite());

    let mut balanced = true;
    let mut points_tested = 0;
    let zero = vec![vec![0.0; ntu.players]];
    for coll in collections {
        if !is_balanced_collection(&coll.coalitions, &coll.weights, ntu.players) {
            failures.push(format!("collection {:?} is not balanced", coll.coalitions));
            balanced = false;
            continue;
        }
        let sets: Vec<(&Coalition, &Vec<Vec<f64>>)> = coll
            .coalitions
            .iter()
            .map(|s| (s, ntu.coalition(*s).map_or(&zero, |c| &c.generators)))
            .collect();
        let combos: usize = sets
            .iter()
            .map(|(_, g)| g.len().max(1))
            .try_fold(1usize, |a, b| a.checked_mul(b))
            .unwrap_or(usize::MAX);
        if combos > INTERSECTION_POINT_LIMIT || !grand_ok {
            continue;
        }
        for choice in sets.iter().map(|(_, g)| 0..g.len()).multi_cartesian_product() {
            let mut v = vec![f64::INFINITY; ntu.players];
            for ((s, gens), &g) in sets.iter().zip(&choice) {
                for j in s.members() {
                    v[j] = v[j].min(gens[g][j]);
                }
            }
            points_tested += 1;
            if ntu.achieves(&v)?.is_none() {
                balanced = false;
                failures.push(format!(
                    "intersection point {v:?} of {:?} is not achievable by the grand coalition",
                    coll.coalitions
                ));
                break;
            }
        }
    }
    Ok(ConditionsReport {
        nonempty,
        comprehensive,
        balanced: balanced && grand_ok,
        collections_tested: collections.len(),
        points_tested,
        failures,
    })
}

/// Where pivoting stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScarfTerminal {
    /// `u_j`: the smallest payoff of `j` over the terminal columns.
    pub payoff: Vec<f64>,
    /// Terminal columns as `(coalition index, generator index, weight)`.
    pub columns: Vec<(usize, usize, f64)>,
    pub collection: BalancedCollection,
    /// Terminal basis as pivot-matrix columns (slacks first, then generators).
    pub basis: Vec<usize>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorePoint {
    pub payoff: Vec<f64>,
    pub collection: BalancedCollection,
    pub columns: Vec<(usize, usize, f64)>,
    /// Convex weights on the grand coalition's generators achieving `payoff`.
    pub grand_weights: Vec<f64>,
    pub pivots: usize,
}

/// Runs the pivoting to its terminal primitive set without checking that
/// the payoff is achievable by the grand coalition.
pub fn scarf_terminal(ntu: &NtuGame, budget: Option<usize>) -> Result<ScarfTerminal> {
    for j in 0..ntu.players {
        if ntu
            .coalition(Coalition::singleton(j))
            .is_none_or(|c| c.generators.is_empty())
        {
            return Err(Error::Pivoting(format!(
                "singleton {} needs a generator",
                Coalition::singleton(j)
            )));
        }
    }
    let m = pivot::Matrix::new(ntu);
    let term = pivot::run(&m, budget.unwrap_or_else(|| ntu.default_pivot_budget()))?;
    let n = ntu.players;
    let mut payoff = vec![f64::INFINITY; n];
    let mut columns = Vec::new();
    for (&k, &w) in term.basis.iter().zip(&term.weights) {
        let Some((c, g)) = m.real(k) else {
            return Err(Error::Pivoting(format!("slack {k} remained in the terminal basis")));
        };
        for j in ntu.coalitions[c].members.members() {
            payoff[j] = payoff[j].min(m.payoff(j, k).expect("member payoff"));
        }
        columns.push((c, g, w));
    }
    if payoff.iter().any(|v| !v.is_finite()) {
        return Err(Error::Pivoting("terminal basis leaves a player uncovered".into()));
    }
    let mut merged: Vec<(Coalition, f64)> = Vec::new();
    for &(c, _, w) in &columns {
        if w <= BALANCE_TOLERANCE {
            continue;
        }
        let s = ntu.coalitions[c].members;
        match merged.iter_mut().find(|(t, _)| *t == s) {
            Some((_, acc)) => *acc += w,
            None => merged.push((s, w)),
        }
    }
    merged.sort_by(|a, b| {
        a.0.len()
            .cmp(&b.0.len())
            .then_with(|| a.0.members().cmp(b.0.members()))
    });
    let collection = BalancedCollection {
        coalitions: merged.iter().map(|m| m.0).collect(),
        weights: merged.iter().map(|m| m.1).collect(),
    };
    Ok(ScarfTerminal {
        payoff,
        columns,
        collection,
        basis: term.basis,
        pivots: term.pivots,
    })
}

/// A payoff vector no coalition dominates and the grand coalition achieves.
pub fn scarf_core_point(ntu: &NtuGame) -> Result<CorePoint> {
    scarf_core_point_with_budget(ntu, None)
}

pub fn scarf_core_point_with_budget(ntu: &NtuGame, budget: Option<usize>) -> Result<CorePoint> {
    let term = scarf_terminal(ntu, budget)?;
    let Some(grand_weights) = ntu.achieves(&term.payoff)? else {
        return Err(Error::NotAchievable { basis: term.basis });
    };
    Ok(CorePoint {
        payoff: term.payoff,
        collection: term.collection,
        columns: term.columns,
        grand_weights,
        pivots: term.pivots,
    })
}

/// Points budget for the brute-force grid.
pub const BRUTE_FORCE_BUDGET: usize = 2_000_000;

/// Every grid point of the grand coalition's (convex, comprehensive) set
/// that no coalition dominates. Coordinates run over multiples of
/// `resolution` between the smallest and largest generator payoff.
pub fn brute_force_core(ntu: &NtuGame, resolution: f64) -> Result<Vec<Vec<f64>>> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidProblem("resolution must be positive".into()));
    }
    let n = ntu.players;
    let all = ntu.coalitions.iter().flat_map(|c| c.generators.iter().flatten());
    let (lo, hi) = all.fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let start = (lo / resolution).floor() as i64;
    let end = (hi / resolution).ceil() as i64 + 1;
    let axis: Vec<f64> = (start..=end).map(|k| k as f64 * resolution).collect();
    let count = (axis.len() as u128).saturating_pow(n as u32);
    if count > BRUTE_FORCE_BUDGET as u128 {
        return Err(Error::BudgetExceeded {
            what: "brute-force core grid",
            estimate: count,
            budget: BRUTE_FORCE_BUDGET,
        });
    }
    let points: Vec<Vec<f64>> = (0..n).map(|_| axis.iter().copied()).multi_cartesian_product().collect();
    let kept: Vec<Option<Vec<f64>>> = points
        .into_par_iter()
        .map(|v| {
            if !is_undominated(ntu, &v, CORE_TOLERANCE) {
                return Ok(None);
            }
            Ok(ntu.achieves(&v)?.map(|_| v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(kept.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests;
