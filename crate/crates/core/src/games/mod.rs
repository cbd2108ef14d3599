//! Incomplete-information exchange economies and normal-form games.
//!
//! Utilities are concave piecewise-linear: the pointwise minimum of a list
//! of affine pieces, one list per state. Strategies and allocations are
//! stored block-wise on the partition that the delivery stage imposes
//! (the pooled partition for ex post delivery, the player's own
//! partition for interim delivery), so measurability holds by
//! construction.

mod grid;
mod restrict;

use serde::{Deserialize, Serialize};

pub use grid::profile_grid;
pub(crate) use grid::{economy_grid, game_grid, RegionLayout};
pub use restrict::{restrict_profile, restrict_to_field};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::probability::{conditional_expectation, is_measurable, InformationStructure, Partition, StateSpace};

/// Feasibility tolerance for resource balance.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Opponent vertex assignments enumerated per guaranteed-utility block.
pub const OPPONENT_ENUMERATION_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delivery {
    ExPost,
    Interim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub coef: Vec<f64>,
    pub intercept: f64,
}

impl AffinePiece {
    pub fn new(coef: Vec<f64>, intercept: f64) -> Self {
        AffinePiece { coef, intercept }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

/// Per-state concave piecewise-linear utility `min_k (c_k · x + d_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UtilityRepr")]
pub struct UtilitySpec {
    dim: usize,
    per_state: Vec<Vec<AffinePiece>>,
}

impl UtilitySpec {
    pub fn new(dim: usize, per_state: Vec<Vec<AffinePiece>>) -> Result<Self> {
        for (w, pieces) in per_state.iter().enumerate() {
            if pieces.is_empty() {
                return Err(Error::InvalidProblem(format!("state {w} has no utility pieces")));
            }
            for piece in pieces {
                if piece.coef.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        found: piece.coef.len(),
                    });
                }
                if !piece.intercept.is_finite() || piece.coef.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidProblem("non-finite utility coefficient".into()));
                }
            }
        }
        Ok(UtilitySpec { dim, per_state })
    }

    /// The same affine utility `c · x + d` at every state.
    pub fn linear(n_states: usize, coef: Vec<f64>, intercept: f64) -> Self {
        let dim = coef.len();
        UtilitySpec {
            dim,
            per_state: vec![vec![AffinePiece::new(coef, intercept)]; n_states],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_states(&self) -> usize {
        self.per_state.len()
    }

    pub fn pieces(&self, w: usize) -> &[AffinePiece] {
        &self.per_state[w]
    }

    pub fn per_state(&self) -> &[Vec<AffinePiece>] {
        &self.per_state
    }

    pub fn eval(&self, x: &[f64], w: usize) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.eval_unchecked(x, w))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], w: usize) -> f64 {
        self.per_state[w]
            .iter()
            .map(|p| p.eval(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `‖c_k‖₁` over all pieces: a sup-norm Lipschitz bound.
    pub fn lipschitz(&self) -> f64 {
        self.per_state
            .iter()
            .flatten()
            .map(|p| p.coef.iter().map(|c| c.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `u(x, w)` as the minimum over the state's affine pieces.
pub fn utility_eval(u: &UtilitySpec, bundle: &[f64], w: usize) -> Result<f64> {
    u.eval(bundle, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EconomyRepr")]
pub struct Economy {
    space: StateSpace,
    info: InformationStructure,
    goods: usize,
    /// `[player][state][good]`
    endowments: Vec<Vec<Vec<f64>>>,
    utilities: Vec<UtilitySpec>,
    delivery: Delivery,
}

impl Economy {
    pub fn new(
        space: StateSpace,
        info: InformationStructure,
        goods: usize,
        endowments: Vec<Vec<Vec<f64>>>,
        utilities: Vec<UtilitySpec>,
        delivery: Delivery,
    ) -> Result<Self> {
        let n = info.n_players();
        check_common_shape(&space, &info, &utilities)?;
        if goods == 0 {
            return Err(Error::InvalidProblem("an economy needs at least one good".into()));
        }
        if endowments.len() != n {
            return Err(Error::InvalidProblem(format!(
                "{} endowments for {n} players",
                endowments.len()
            )));
        }
        for e in &endowments {
            if e.len() != space.len() {
                return Err(Error::Dimension {
                    expected: space.len(),
                    found: e.len(),
                });
            }
            for bundle in e {
                if bundle.len() != goods {
                    return Err(Error::Dimension {
                        expected: goods,
                        found: bundle.len(),
                    });
                }
            }
        }
        for u in &utilities {
            if u.dim() != goods {
                return Err(Error::Dimension {
                    expected: goods,
                    found: u.dim(),
                });
            }
        }
        Ok(Economy {
            space,
            info,
            goods,
            endowments,
            utilities,
            delivery,
        })
    }

    pub fn goods(&self) -> usize {
        self.goods
    }

    pub fn endowment(&self, i: usize, w: usize) -> &[f64] {
        &self.endowments[i][w]
    }

    pub fn endowments(&self) -> &[Vec<Vec<f64>>] {
        &self.endowments
    }

    /// Σ_{i∈S} e_i(w) for one good.
    pub fn coalition_total(&self, coalition: Coalition, w: usize, good: usize) -> f64 {
        coalition.members().map(|i| self.endowments[i][w][good]).sum()
    }
}

/// A player's action polytope, given by its vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ActionRepr")]
pub struct ActionSet {
    vertices: Vec<Vec<f64>>,
}

impl ActionSet {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::InvalidProblem("action set needs a vertex".into()))?;
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidProblem("actions need at least one coordinate".into()));
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != d) {
            return Err(Error::Dimension {
                expected: d,
                found: v.len(),
            });
        }
        Ok(ActionSet { vertices })
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; self.dim()];
        for (v, &l) in self.vertices.iter().zip(weights) {
            for (x, c) in a.iter_mut().zip(v) {
                *x += l * c;
            }
        }
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameRepr")]
pub struct NormalFormGame {
    space: StateSpace,
    info: InformationStructure,
    actions: Vec<ActionSet>,
    /// Utilities over the concatenated joint action.
    utilities: Vec<UtilitySpec>,
    delivery: Delivery,
    offsets: Vec<usize>,
}

impl NormalFormGame {
    pub fn new(
        space: StateSpace,
        info: InformationStructure,
        actions: Vec<ActionSet>,
        utilities: Vec<UtilitySpec>,
        delivery: Delivery,
    ) -> Result<Self> {
        let n = info.n_players();
        check_common_shape(&space, &info, &utilities)?;
        if actions.len() != n {
            return Err(Error::InvalidProblem(format!(
                "{} action sets for {n} players",
                actions.len()
            )));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut total = 0;
        for a in &actions {
            offsets.push(total);
            total += a.dim();
        }
        offsets.push(total);
        for u in &utilities {
            if u.dim() != total {
                return Err(Error::Dimension {
                    expected: total,
                    found: u.dim(),
                });
            }
        }
        Ok(NormalFormGame {
            space,
            info,
            actions,
            utilities,
            delivery,
            offsets,
        })
    }

    pub fn action_set(&self, i: usize) -> &ActionSet {
        &self.actions[i]
    }

    pub fn joint_dim(&self) -> usize {
        self.offsets[self.actions.len()]
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }
}

fn check_common_shape(space: &StateSpace, info: &InformationStructure, utilities: &[UtilitySpec]) -> Result<()> {
    if info.n_states() != space.len() {
        return Err(Error::SpaceMismatch {
            left: space.len(),
            right: info.n_states(),
        });
    }
    if utilities.len() != info.n_players() {
        return Err(Error::InvalidProblem(format!(
            "{} utilities for {} players",
            utilities.len(),
            info.n_players()
        )));
    }
    if let Some(u) = utilities.iter().find(|u| u.n_states() != space.len()) {
        return Err(Error::Dimension {
            expected: space.len(),
            found: u.n_states(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    Economy(Economy),
    Game(NormalFormGame),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl From<Economy> for Problem {
    fn from(e: Economy) -> Self {
        Problem::Economy(e)
    }
}

impl From<NormalFormGame> for Problem {
    fn from(g: NormalFormGame) -> Self {
        Problem::Game(g)
    }
}

impl Problem {
    pub fn space(&self) -> &StateSpace {
        match self {
            Problem::Economy(e) => &e.space,
            Problem::Game(g) => &g.space,
        }
    }

    pub fn info(&self) -> &InformationStructure {
        match self {
            Problem::Economy(e) => &e.info,
            Problem::Game(g) => &g.info,
        }
    }

    pub fn delivery(&self) -> Delivery {
        match self {
            Problem::Economy(e) => e.delivery,
            Problem::Game(g) => g.delivery,
        }
    }

    pub fn n_players(&self) -> usize {
        self.info().n_players()
    }

    pub fn n_states(&self) -> usize {
        self.space().len()
    }

    pub fn utility(&self, i: usize) -> &UtilitySpec {
        match self {
            Problem::Economy(e) => &e.utilities[i],
            Problem::Game(g) => &g.utilities[i],
        }
    }

    pub fn utilities(&self) -> &[UtilitySpec] {
        match self {
            Problem::Economy(e) => &e.utilities,
            Problem::Game(g) => &g.utilities,
        }
    }

    /// Dimension of one player's bundle or action.
    pub fn dim(&self, i: usize) -> usize {
        match self {
            Problem::Economy(e) => e.goods,
            Problem::Game(g) => g.actions[i].dim(),
        }
    }

    pub fn as_economy(&self) -> Option<&Economy> {
        match self {
            Problem::Economy(e) => Some(e),
            Problem::Game(_) => None,
        }
    }

    pub fn as_game(&self) -> Option<&NormalFormGame> {
        match self {
            Problem::Game(g) => Some(g),
            Problem::Economy(_) => None,
        }
    }

    pub fn is_economy(&self) -> bool {
        matches!(self, Problem::Economy(_))
    }

    /// The partition player `i`'s strategies must be measurable for.
    pub fn strategy_partition(&self, i: usize) -> &Partition {
        match self.delivery() {
            Delivery::ExPost => self.info().join(),
            Delivery::Interim => self.info().partition(i),
        }
    }

    pub fn grand_coalition(&self) -> Coalition {
        Coalition::grand(self.n_players())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_problem(self)
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidProblem(v.clone())),
        }
    }

    /// Player `i`'s realized utility `u_i(x(w), w)` at every state.
    pub fn realized_utility(&self, x: &Profile, i: usize) -> Vec<f64> {
        (0..self.n_states())
            .map(|w| match self {
                Problem::Economy(_) => self.utility(i).eval_unchecked(x.value(i, w), w),
                Problem::Game(g) => {
                    let joint = x.joint_action(g, w);
                    self.utility(i).eval_unchecked(&joint, w)
                }
            })
            .collect()
    }
}

/// Checks the standing hypotheses: endowment measurability for the delivery
/// stage, nonnegative endowments, and (as warnings) utility nonnegativity on
/// the vertices of the feasible region.
pub fn validate_problem(problem: &Problem) -> ValidationReport {
    let mut report = ValidationReport::default();
    let space = problem.space();
    match problem {
        Problem::Economy(e) => {
            for i in 0..problem.n_players() {
                let required = problem.strategy_partition(i);
                for g in 0..e.goods {
                    let column: Vec<f64> = (0..space.len()).map(|w| e.endowments[i][w][g]).collect();
                    if !is_measurable(&column, required) {
                        let field = match e.delivery {
                            Delivery::ExPost => "the pooled information partition".to_string(),
                            Delivery::Interim => format!("P_{}", i + 1),
                        };
                        report.violations.push(format!(
                            "endowment of player {} (good {}) is not measurable for {field}",
                            i + 1,
                            g + 1
                        ));
                    }
                    if let Some(w) = column.iter().position(|&v| !(v >= 0.0 && v.is_finite())) {
                        report.violations.push(format!(
                            "endowment of player {} is negative or non-finite at state '{}'",
                            i + 1,
                            space.label(w)
                        ));
                    }
                }
            }
            for i in 0..problem.n_players() {
                'states: for w in 0..space.len() {
                    let totals: Vec<f64> = (0..e.goods)
                        .map(|g| e.coalition_total(problem.grand_coalition(), w, g))
                        .collect();
                    for corner in 0..(1u64 << e.goods.min(16)) {
                        let bundle: Vec<f64> = (0..e.goods)
                            .map(|g| if corner & (1 << g) != 0 { totals[g] } else { 0.0 })
                            .collect();
                        let u = e.utilities[i].eval_unchecked(&bundle, w);
                        if u < 0.0 {
                            report.warnings.push(format!(
                                "utility of player {} is negative ({u}) at state '{}' on the feasible box",
                                i + 1,
                                space.label(w)
                            ));
                            continue 'states;
                        }
                    }
                }
            }
        }
        Problem::Game(g) => {
            let n = problem.n_players();
            let count: usize = g
                .actions
                .iter()
                .map(|a| a.vertices().len())
                .try_fold(1usize, |acc, k| acc.checked_mul(k))
                .unwrap_or(usize::MAX);
            if count <= 4096 {
                for i in 0..n {
                    'states: for w in 0..space.len() {
                        for idx in 0..count {
                            let mut rest = idx;
                            let mut joint = Vec::with_capacity(g.joint_dim());
                            for a in &g.actions {
                                let k = a.vertices().len();
                                joint.extend_from_slice(&a.vertices()[rest % k]);
                                rest /= k;
                            }
                            let u = g.utilities[i].eval_unchecked(&joint, w);
                            if u < 0.0 {
                                report.warnings.push(format!(
                                    "utility of player {} is negative ({u}) at state '{}' on a joint vertex",
                                    i + 1,
                                    space.label(w)
                                ));
                                continue 'states;
                            }
                        }
                    }
                }
            } else {
                report
                    .warnings
                    .push("joint vertex set too large; utility sign not sampled".into());
            }
        }
    }
    report
}

/// One player's strategy, stored as one vector per block of its
/// measurability partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StrategyRepr")]
pub struct Strategy {
    pub partition: Partition,
    pub values: Vec<Vec<f64>>,
}

impl Strategy {
    pub fn new(partition: Partition, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(Error::InvalidProfile(format!(
                "{} block values for a partition with {} blocks",
                values.len(),
                partition.len()
            )));
        }
        Ok(Strategy { partition, values })
    }

    pub fn constant(partition: Partition, value: Vec<f64>) -> Self {
        let values = vec![value; partition.len()];
        Strategy { partition, values }
    }

    pub fn at(&self, w: usize) -> &[f64] {
        &self.values[self.partition.block_of(w)]
    }

    pub fn state_values(&self) -> Vec<Vec<f64>> {
        (0..self.partition.n_states()).map(|w| self.at(w).to_vec()).collect()
    }
}

/// A strategy or allocation profile for all players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    strategies: Vec<Strategy>,
}

impl Profile {
    fn check_strategy(problem: &Problem, i: usize, s: &Strategy) -> Result<()> {
        if &s.partition != problem.strategy_partition(i) {
            return Err(Error::NotMeasurable(format!(
                "player {} strategy is not stored on its required partition",
                i + 1
            )));
        }
        let d = problem.dim(i);
        if let Some(v) = s.values.iter().find(|v| v.len() != d) {
            return Err(Error::Dimension {
                expected: d,
                found: v.len(),
            });
        }
        if s.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("non-finite entry".into()));
        }
        Ok(())
    }

    pub fn new(problem: &Problem, strategies: Vec<Strategy>) -> Result<Self> {
        if strategies.len() != problem.n_players() {
            return Err(Error::InvalidProfile(format!(
                "{} strategies for {} players",
                strategies.len(),
                problem.n_players()
            )));
        }
        for (i, s) in strategies.iter().enumerate() {
            Profile::check_strategy(problem, i, s)?;
        }
        Ok(Profile { strategies })
    }

    /// Block values `[player][block][dim]` on each player's strategy partition.
    pub fn from_blocks(problem: &Problem, values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let strategies = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| Strategy::new(problem.strategy_partition(i).clone(), v))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(problem, strategies)
    }

    /// Per-state values `[player][state][dim]`; rejects anything not
    /// measurable for the delivery stage (exact comparison).
    pub fn from_states(problem: &Problem, values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if values.len() != problem.n_players() {
            return Err(Error::InvalidProfile(format!(
                "{} players given, {} expected",
                values.len(),
                problem.n_players()
            )));
        }
        let mut strategies = Vec::with_capacity(values.len());
        for (i, per_state) in values.into_iter().enumerate() {
            if per_state.len() != problem.n_states() {
                return Err(Error::Dimension {
                    expected: problem.n_states(),
                    found: per_state.len(),
                });
            }
            let partition = problem.strategy_partition(i);
            if !is_measurable(&per_state, partition) {
                return Err(Error::NotMeasurable(format!(
                    "player {} is not measurable for its {} partition",
                    i + 1,
                    match problem.delivery() {
                        Delivery::ExPost => "pooled",
                        Delivery::Interim => "own",
                    }
                )));
            }
            let block_values = partition.blocks().iter().map(|b| per_state[b[0]].clone()).collect();
            strategies.push(Strategy::new(partition.clone(), block_values)?);
        }
        Profile::new(problem, strategies)
    }

    /// Every player holds the same vector in every state.
    pub fn constant(problem: &Problem, values: Vec<Vec<f64>>) -> Result<Self> {
        let per_state = values
            .into_iter()
            .map(|v| vec![v; problem.n_states()])
            .collect();
        Profile::from_states(problem, per_state)
    }

    pub fn endowment(econ: &Economy) -> Result<Self> {
        let problem = Problem::Economy(econ.clone());
        Profile::from_states(&problem, econ.endowments.clone())
    }

    pub fn n_players(&self) -> usize {
        self.strategies.len()
    }

    pub fn strategy(&self, i: usize) -> &Strategy {
        &self.strategies[i]
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn value(&self, i: usize, w: usize) -> &[f64] {
        self.strategies[i].at(w)
    }

    pub fn state_values(&self) -> Vec<Vec<Vec<f64>>> {
        self.strategies.iter().map(Strategy::state_values).collect()
    }

    pub fn joint_action(&self, game: &NormalFormGame, w: usize) -> Vec<f64> {
        let mut joint = Vec::with_capacity(game.joint_dim());
        for s in &self.strategies {
            joint.extend_from_slice(s.at(w));
        }
        joint
    }

    /// Structural checks plus grand-coalition feasibility for economies and
    /// action-set membership (bounding box of vertices) for games.
    pub fn check_valid(&self, problem: &Problem) -> Result<()> {
        if self.strategies.len() != problem.n_players() {
            return Err(Error::InvalidProfile("player count mismatch".into()));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            Profile::check_strategy(problem, i, s)?;
        }
        match problem {
            Problem::Economy(e) => {
                check_feasible(e, problem.grand_coalition(), |i, w| self.value(i, w))
            }
            Problem::Game(_) => Ok(()),
        }
    }
}

pub(crate) fn check_feasible<'a>(
    econ: &Economy,
    coalition: Coalition,
    value: impl Fn(usize, usize) -> &'a [f64],
) -> Result<()> {
    for w in 0..econ.space.len() {
        for g in 0..econ.goods {
            let mut sum = 0.0;
            for i in coalition.members() {
                let v = value(i, w)[g];
                if v < -FEASIBILITY_TOLERANCE {
                    return Err(Error::InvalidProfile(format!(
                        "player {} holds a negative amount {v} of good {} at state '{}'",
                        i + 1,
                        g + 1,
                        econ.space.label(w)
                    )));
                }
                sum += v;
            }
            let total = econ.coalition_total(coalition, w, g);
            if (sum - total).abs() > FEASIBILITY_TOLERANCE {
                return Err(Error::InvalidProfile(format!(
                    "coalition {coalition} allocates {sum} of good {} at state '{}' but owns {total}",
                    g + 1,
                    econ.space.label(w)
                )));
            }
        }
    }
    Ok(())
}

/// Strategies of a coalition's members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionProfile {
    pub coalition: Coalition,
    /// One strategy per member, in increasing player order.
    pub strategies: Vec<Strategy>,
}

impl CoalitionProfile {
    pub fn member(&self, i: usize) -> Option<&Strategy> {
        self.coalition
            .members()
            .position(|m| m == i)
            .map(|k| &self.strategies[k])
    }

    /// Structural checks, and resource balance at every state for economies.
    pub fn check_valid(&self, problem: &Problem) -> Result<()> {
        if self.strategies.len() != self.coalition.len() {
            return Err(Error::InvalidProfile("one strategy per member is required".into()));
        }
        for (i, s) in self.coalition.members().zip(&self.strategies) {
            if i >= problem.n_players() {
                return Err(Error::UnknownPlayer(i));
            }
            Profile::check_strategy(problem, i, s)?;
        }
        if let Problem::Economy(e) = problem {
            check_feasible(e, self.coalition, |i, w| self.member(i).expect("member").at(w))?;
        }
        Ok(())
    }

    /// The profile where members follow this coalition profile and everyone
    /// else follows `rest`.
    pub fn overlay(&self, rest: &Profile) -> Profile {
        let mut strategies = rest.strategies.clone();
        for (i, s) in self.coalition.members().zip(&self.strategies) {
            strategies[i] = s.clone();
        }
        Profile { strategies }
    }
}

/// `E(U_i(x) | F_i)` at every state.
pub fn interim_utility(problem: &Problem, x: &Profile, i: usize) -> Result<Vec<f64>> {
    interim_utility_given(problem, x, i, problem.info().partition(i))
}

/// Conditional expected utility under an arbitrary conditioning partition.
pub fn interim_utility_given(problem: &Problem, x: &Profile, i: usize, conditioning: &Partition) -> Result<Vec<f64>> {
    if i >= problem.n_players() {
        return Err(Error::UnknownPlayer(i));
    }
    x.check_valid(problem)?;
    let realized = problem.realized_utility(x, i);
    Ok(conditional_expectation(&realized, conditioning, problem.space()))
}

/// Per-state worst case, over all admissible opponent strategies, of
/// member `i`'s interim utility against the coalition profile `y_s`.
pub fn guaranteed_interim_utility(problem: &Problem, y_s: &CoalitionProfile, i: usize) -> Result<Vec<f64>> {
    guaranteed_interim_utility_given(problem, y_s, i, problem.info().partition(i))
}

pub fn guaranteed_interim_utility_given(
    problem: &Problem,
    y_s: &CoalitionProfile,
    i: usize,
    conditioning: &Partition,
) -> Result<Vec<f64>> {
    let member = y_s.member(i).ok_or(Error::UnknownPlayer(i))?;
    y_s.check_valid(problem)?;
    let space = problem.space();
    let game = match problem {
        Problem::Economy(_) => {
            let realized: Vec<f64> = (0..space.len())
                .map(|w| problem.utility(i).eval_unchecked(member.at(w), w))
                .collect();
            return Ok(conditional_expectation(&realized, conditioning, space));
        }
        Problem::Game(g) => g,
    };
    let mut out = vec![0.0; space.len()];
    for block in conditioning.blocks() {
        let value = worst_case_block_value(problem, game, y_s, i, block)?;
        for &w in block {
            out[w] = value;
        }
    }
    Ok(out)
}

/// Opponent strategy blocks touching `block`, as `(player, strategy block)`.
pub(crate) fn opponent_blocks(problem: &Problem, coalition: Coalition, block: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..problem.n_players() {
        if coalition.contains(j) {
            continue;
        }
        let p = problem.strategy_partition(j);
        let mut seen: Vec<usize> = block.iter().map(|&w| p.block_of(w)).collect();
        seen.sort_unstable();
        seen.dedup();
        out.extend(seen.into_iter().map(|b| (j, b)));
    }
    out
}

/// Iterates all vertex assignments to the given opponent blocks.
pub(crate) fn for_each_assignment(
    game: &NormalFormGame,
    blocks: &[(usize, usize)],
    mut f: impl FnMut(&[usize]),
) -> Result<()> {
    let radix: Vec<usize> = blocks.iter().map(|&(j, _)| game.actions[j].vertices().len()).collect();
    let count = radix
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k))
        .filter(|&c| c <= OPPONENT_ENUMERATION_LIMIT)
        .ok_or(Error::BudgetExceeded {
            what: "opponent vertex assignments",
            estimate: radix.iter().map(|&k| k as u128).product(),
            budget: OPPONENT_ENUMERATION_LIMIT,
        })?;
    let mut digits = vec![0usize; blocks.len()];
    for _ in 0..count {
        f(&digits);
        for (d, &r) in digits.iter_mut().zip(&radix) {
            *d += 1;
            if *d < r {
                break;
            }
            *d = 0;
        }
    }
    Ok(())
}

fn worst_case_block_value(
    problem: &Problem,
    game: &NormalFormGame,
    y_s: &CoalitionProfile,
    i: usize,
    block: &[usize],
) -> Result<f64> {
    let space = problem.space();
    let mass = space.mass(block);
    let opponents = opponent_blocks(problem, y_s.coalition, block);
    let u = problem.utility(i);
    let mut worst = f64::INFINITY;
    let mut joint = vec![0.0; game.joint_dim()];
    for_each_assignment(game, &opponents, |digits| {
        let mut total = 0.0;
        for &w in block {
            for j in 0..problem.n_players() {
                let off = game.offset(j);
                let action: &[f64] = match y_s.member(j) {
                    Some(s) => s.at(w),
                    None => {
                        let b = problem.strategy_partition(j).block_of(w);
                        let k = opponents
                            .iter()
                            .position(|&(pj, pb)| pj == j && pb == b)
                            .expect("opponent block listed");
                        &game.actions[j].vertices()[digits[k]]
                    }
                };
                joint[off..off + action.len()].copy_from_slice(action);
            }
            total += space.weight(w) * u.eval_unchecked(&joint, w);
        }
        worst = worst.min(total / mass);
    })?;
    Ok(worst)
}


// Decoding goes through the constructors so malformed input is rejected
// instead of reaching code that assumes consistent shapes.

#[derive(Deserialize)]
struct UtilityRepr {
    dim: usize,
    per_state: Vec<Vec<AffinePiece>>,
}

impl TryFrom<UtilityRepr> for UtilitySpec {
    type Error = Error;

    fn try_from(r: UtilityRepr) -> Result<Self> {
        UtilitySpec::new(r.dim, r.per_state)
    }
}

#[derive(Deserialize)]
struct EconomyRepr {
    space: StateSpace,
    info: InformationStructure,
    goods: usize,
    endowments: Vec<Vec<Vec<f64>>>,
    utilities: Vec<UtilitySpec>,
    delivery: Delivery,
}

impl TryFrom<EconomyRepr> for Economy {
    type Error = Error;

    fn try_from(r: EconomyRepr) -> Result<Self> {
        Economy::new(r.space, r.info, r.goods, r.endowments, r.utilities, r.delivery)
    }
}

#[derive(Deserialize)]
struct ActionRepr {
    vertices: Vec<Vec<f64>>,
}

impl TryFrom<ActionRepr> for ActionSet {
    type Error = Error;

    fn try_from(r: ActionRepr) -> Result<Self> {
        ActionSet::new(r.vertices)
    }
}

/// `offsets` is derived, so it is recomputed rather than trusted.
#[derive(Deserialize)]
struct GameRepr {
    space: StateSpace,
    info: InformationStructure,
    actions: Vec<ActionSet>,
    utilities: Vec<UtilitySpec>,
    delivery: Delivery,
}

impl TryFrom<GameRepr> for NormalFormGame {
    type Error = Error;

    fn try_from(r: GameRepr) -> Result<Self> {
        NormalFormGame::new(r.space, r.info, r.actions, r.utilities, r.delivery)
    }
}

#[derive(Deserialize)]
struct StrategyRepr {
    partition: Partition,
    values: Vec<Vec<f64>>,
}

impl TryFrom<StrategyRepr> for Strategy {
    type Error = Error;

    fn try_from(r: StrategyRepr) -> Result<Self> {
        Strategy::new(r.partition, r.values)
    }
}

#[cfg(test)]
mod tests;
