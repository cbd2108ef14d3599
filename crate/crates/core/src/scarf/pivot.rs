//! Primitive-set pivoting (Scarf's lemma) on a finitely generated NTU game.
//!
//! Columns `0..n` are slacks; every other column is one generator of one
//! coalition. Row orderings use a strict key so that no two entries of a
//! row compare equal: slack diagonal < member payoffs < non-member entries <
//! slack off-diagonal, ties broken by column index.

use std::cmp::Ordering;

use super::NtuGame;
use crate::error::{Error, Result};

const PIVOT_TOLERANCE: f64 = 1e-12;

pub(super) struct Matrix<'a> {
    ntu: &'a NtuGame,
    /// Real columns as (coalition index, generator index).
    columns: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, PartialEq)]
struct Key {
    class: u8,
    value: f64,
    column: usize,
}

impl Key {
    fn cmp(&self, other: &Key) -> Ordering {
        self.class
            .cmp(&other.class)
            .then(self.value.total_cmp(&other.value))
            .then(self.column.cmp(&other.column))
    }
}

impl<'a> Matrix<'a> {
    pub fn new(ntu: &'a NtuGame) -> Self {
        let columns = ntu
            .coalitions()
            .iter()
            .enumerate()
            .flat_map(|(c, co)| (0..co.generators.len()).map(move |g| (c, g)))
            .collect();
        Matrix { ntu, columns }
    }

    pub fn n(&self) -> usize {
        self.ntu.players()
    }

    pub fn width(&self) -> usize {
        self.n() + self.columns.len()
    }

    pub fn real(&self, k: usize) -> Option<(usize, usize)> {
        k.checked_sub(self.n()).map(|r| self.columns[r])
    }

    fn key(&self, i: usize, k: usize) -> Key {
        match self.real(k) {
            None => Key {
                class: if i == k { 0 } else { 3 },
                value: 0.0,
                column: k,
            },
            Some((c, g)) => {
                let co = &self.ntu.coalitions()[c];
                if co.members.contains(i) {
                    Key {
                        class: 1,
                        value: co.generators[g][i],
                        column: k,
                    }
                } else {
                    Key {
                        class: 2,
                        value: 0.0,
                        column: k,
                    }
                }
            }
        }
    }

    fn incidence(&self, i: usize, k: usize) -> f64 {
        match self.real(k) {
            None => (i == k) as u8 as f64,
            Some((c, _)) => self.ntu.coalitions()[c].members.contains(i) as u8 as f64,
        }
    }

    /// Entry `(i, k)` as a payoff when it is a member payoff.
    pub fn payoff(&self, i: usize, k: usize) -> Option<f64> {
        let key = self.key(i, k);
        (key.class == 1).then_some(key.value)
    }
}

pub(super) struct Terminal {
    pub basis: Vec<usize>,
    pub weights: Vec<f64>,
    pub pivots: usize,
}

struct Feasible {
    basis: Vec<usize>,
    /// Dense inverse of the basis matrix, row-major.
    inv: Vec<Vec<f64>>,
}

impl Feasible {
    fn slacks(n: usize) -> Self {
        let inv = (0..n)
            .map(|r| (0..n).map(|c| (r == c) as u8 as f64).collect())
            .collect();
        Feasible {
            basis: (0..n).collect(),
            inv,
        }
    }

    fn solution(&self) -> Vec<f64> {
        // The right-hand side is the all-ones vector.
        self.inv.iter().map(|row| row.iter().sum()).collect()
    }

    /// Brings column `k` into the basis; returns the column that leaves.
    fn pivot(&mut self, m: &Matrix<'_>, k: usize) -> Result<usize> {
        let n = self.basis.len();
        let d: Vec<f64> = (0..n)
            .map(|r| (0..n).map(|c| self.inv[r][c] * m.incidence(c, k)).sum())
            .collect();
        let x = self.solution();
        // Lexicographic ratio test on [x | inv] / d.
        let mut best: Option<usize> = None;
        for r in 0..n {
            if d[r] <= PIVOT_TOLERANCE {
                continue;
            }
            match best {
                None => best = Some(r),
                Some(b) => {
                    let lex = std::iter::once((x[r], x[b]))
                        .chain((0..n).map(|c| (self.inv[r][c], self.inv[b][c])))
                        .map(|(vr, vb)| vr / d[r] - vb / d[b])
                        .find(|diff| diff.abs() > PIVOT_TOLERANCE);
                    if matches!(lex, Some(diff) if diff < 0.0) {
                        best = Some(r);
                    }
                }
            }
        }
        let r = best.ok_or_else(|| Error::Pivoting(format!("column {k} cannot enter the feasible basis")))?;
        let pivot = d[r];
        let pivot_row: Vec<f64> = self.inv[r].iter().map(|v| v / pivot).collect();
        for (row, inv_row) in self.inv.iter_mut().enumerate() {
            if row == r {
                continue;
            }
            let f = d[row];
            if f != 0.0 {
                for (v, p) in inv_row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        self.inv[r] = pivot_row;
        Ok(std::mem::replace(&mut self.basis[r], k))
    }
}

fn row_argmin(m: &Matrix<'_>, i: usize, cols: &[usize], skip: Option<usize>) -> usize {
    cols.iter()
        .copied()
        .filter(|&k| Some(k) != skip)
        .min_by(|&a, &b| m.key(i, a).cmp(&m.key(i, b)))
        .expect("nonempty basis")
}

pub(super) fn run(m: &Matrix<'_>, budget: usize) -> Result<Terminal> {
    let n = m.n();
    let width = m.width();
    if width == n {
        return Err(Error::Pivoting("game has no generators".into()));
    }
    let mut feasible = Feasible::slacks(n);
    // Ordinal basis: slacks 1..n plus the column with the largest row-0 entry.
    let j0 = (n..width)
        .max_by(|&a, &b| m.key(0, a).cmp(&m.key(0, b)))
        .expect("real column");
    let mut ordinal: Vec<usize> = (1..n).chain([j0]).collect();
    let mut entering = j0;
    let mut pivots = 0;
    loop {
        if pivots >= budget {
            let mut last = feasible.basis.clone();
            last.sort_unstable();
            return Err(Error::PivotBudget { budget, last_basis: last });
        }
        pivots += 1;
        let leaving = feasible.pivot(m, entering)?;
        if leaving == 0 {
            break;
        }
        // Ordinal step: drop `leaving`, find the row it was the minimum of.
        let i0 = (0..n)
            .find(|&i| row_argmin(m, i, &ordinal, None) == leaving)
            .ok_or_else(|| Error::Pivoting("leaving column is not a row minimum".into()))?;
        let rest: Vec<usize> = ordinal.iter().copied().filter(|&k| k != leaving).collect();
        let j_star = row_argmin(m, i0, &rest, None);
        // The row j* was minimal in before the removal.
        let i1 = (0..n)
            .find(|&i| i != i0 && row_argmin(m, i, &ordinal, None) == j_star)
            .ok_or_else(|| Error::Pivoting("ordinal basis lost its row structure".into()))?;
        let minima: Vec<Key> = (0..n).map(|i| m.key(i, row_argmin(m, i, &rest, None))).collect();
        let candidate = (0..width)
            .filter(|k| !rest.contains(k))
            .filter(|&k| (0..n).all(|i| i == i1 || m.key(i, k).cmp(&minima[i]) == Ordering::Greater))
            .max_by(|&a, &b| m.key(i1, a).cmp(&m.key(i1, b)))
            .ok_or_else(|| Error::Pivoting("no column completes the ordinal basis".into()))?;
        ordinal = rest;
        ordinal.push(candidate);
        if candidate == 0 {
            break;
        }
        entering = candidate;
    }
    let x = feasible.solution();
    Ok(Terminal {
        basis: feasible.basis,
        weights: x,
        pivots,
    })
}
