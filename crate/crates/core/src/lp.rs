//! Thin wrapper over `minilp` with the conventions used by the blockers.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::error::{Error, Result};

pub(crate) use minilp::Variable as Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cmp {
    Le,
    Ge,
    Eq,
}

pub(crate) struct Lp {
    inner: Problem,
}

pub(crate) struct LpSolution {
    inner: minilp::Solution,
}

impl LpSolution {
    #[cfg(test)]
    pub fn objective(&self) -> f64 {
        self.inner.objective()
    }

    pub fn value(&self, v: Var) -> f64 {
        *self.inner.var_value(v)
    }
}

impl Lp {
    pub fn maximize() -> Self {
        Lp {
            inner: Problem::new(OptimizationDirection::Maximize),
        }
    }

    #[cfg(test)]
    pub fn minimize() -> Self {
        Lp {
            inner: Problem::new(OptimizationDirection::Minimize),
        }
    }

    pub fn var(&mut self, objective: f64, lo: f64, hi: f64) -> Var {
        self.inner.add_var(objective, (lo, hi))
    }

    pub fn free(&mut self, objective: f64) -> Var {
        self.var(objective, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn constraint(&mut self, terms: &[(Variable, f64)], cmp: Cmp, rhs: f64) {
        let op = match cmp {
            Cmp::Le => ComparisonOp::Le,
            Cmp::Ge => ComparisonOp::Ge,
            Cmp::Eq => ComparisonOp::Eq,
        };
        self.inner.add_constraint(terms, op, rhs);
    }

    /// `Ok(None)` when infeasible.
    pub fn solve(&self) -> Result<Option<LpSolution>> {
        match self.inner.solve() {
            Ok(inner) => Ok(Some(LpSolution { inner })),
            Err(minilp::Error::Infeasible) => Ok(None),
            Err(minilp::Error::Unbounded) => Err(Error::Lp("unbounded".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program() {
        let mut lp = Lp::maximize();
        let x = lp.var(1.0, 0.0, f64::INFINITY);
        let y = lp.var(2.0, 0.0, 3.0);
        lp.constraint(&[(x, 1.0), (y, 1.0)], Cmp::Le, 4.0);
        let s = lp.solve().unwrap().unwrap();
        assert!((s.objective() - 7.0).abs() < 1e-9);
        assert!((s.value(x) - 1.0).abs() < 1e-9);

        let mut bad = Lp::minimize();
        let z = bad.free(0.0);
        bad.constraint(&[(z, 1.0)], Cmp::Ge, 1.0);
        bad.constraint(&[(z, 1.0)], Cmp::Eq, 0.0);
        assert!(bad.solve().unwrap().is_none());
    }
}
