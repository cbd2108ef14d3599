//! The auxiliary game whose players are pairs `(i, K)` of a player and one
//! block of its information partition, the map `L` back to the original
//! game, and the finitely generated characteristic-function game `G_C`.
//!
//! Admissible coalitions are the pairs `(S₀, F)` with `F` a common-knowledge
//! event of `S₀`; they map to `{(i, K) : i ∈ S₀, K ⊆ F}`. Other coalitions of
//! aux players are left out of `G_C`, which is the same as giving them the
//! nonpositive orthant: with nonnegative utilities they never dominate.

mod solve;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use solve::{solve, Certification, CertificationLevel, SolveOptions, SolveOutcome};

use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::games::{
    economy_grid, game_grid, guaranteed_interim_utility_given, CoalitionProfile, Problem, Profile, RegionLayout,
    Strategy,
};
use crate::probability::{common_knowledge_events, Event};
use crate::scarf::{NtuCoalition, NtuGame, CORE_TOLERANCE};

/// Player `player` restricted to block `block` of its information partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxPlayer {
    pub player: usize,
    pub block: usize,
    pub states: Vec<usize>,
}

/// An admissible coalition of aux players and the `(S₀, F)` it comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleCoalition {
    pub members: Coalition,
    pub origin: Coalition,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxGame {
    problem: Problem,
    players: Vec<AuxPlayer>,
    catalogue: Vec<AdmissibleCoalition>,
}

/// Aux profile stored per state: `[aux player][state][dim]`, zero off the
/// aux player's block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxProfile {
    pub values: Vec<Vec<Vec<f64>>>,
}

/// Builds `J` in canonical order (players, then blocks) and the admissible
/// catalogue (origin coalitions by size then lexicographically, events in
/// canonical order).
pub fn build_auxiliary_game(problem: &Problem) -> Result<AuxGame> {
    problem.ensure_valid()?;
    let info = problem.info();
    let players: Vec<AuxPlayer> = (0..problem.n_players())
        .flat_map(|i| {
            info.partition(i)
                .blocks()
                .iter()
                .enumerate()
                .map(move |(k, b)| AuxPlayer {
                    player: i,
                    block: k,
                    states: b.clone(),
                })
        })
        .collect();
    if players.len() >= MAX_PLAYERS {
        return Err(Error::Unsupported(format!(
            "{} aux players exceed the limit of {}",
            players.len(),
            MAX_PLAYERS - 1
        )));
    }
    let mut catalogue: Vec<AdmissibleCoalition> = Vec::new();
    for origin in Coalition::all_nonempty(problem.n_players()) {
        for event in common_knowledge_events(origin, info)? {
            let members = Coalition::from_members(
                players
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| origin.contains(a.player) && a.states.iter().all(|&w| event.contains(w)))
                    .map(|(j, _)| j),
            );
            if !catalogue.iter().any(|c| c.members == members) {
                catalogue.push(AdmissibleCoalition { members, origin, event });
            }
        }
    }
    Ok(AuxGame {
        problem: problem.clone(),
        players,
        catalogue,
    })
}

impl AuxGame {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn players(&self) -> &[AuxPlayer] {
        &self.players
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn catalogue(&self) -> &[AdmissibleCoalition] {
        &self.catalogue
    }

    pub fn index_of(&self, player: usize, block: usize) -> Option<usize> {
        self.players.iter().position(|a| a.player == player && a.block == block)
    }

    /// The aux player holding state `w` for `player`.
    pub fn owner(&self, player: usize, w: usize) -> usize {
        let block = self.problem.info().partition(player).block_of(w);
        self.index_of(player, block).expect("every block is an aux player")
    }

    pub fn admissible(&self, origin: Coalition, event: &Event) -> Option<usize> {
        self.catalogue
            .iter()
            .position(|c| c.origin == origin && &c.event == event)
    }

    /// `e′_j = e_i χ_K`, per state (economies).
    pub fn endowment(&self, j: usize) -> Option<Vec<Vec<f64>>> {
        let econ = self.problem.as_economy()?;
        let a = &self.players[j];
        Some(
            (0..self.problem.n_states())
                .map(|w| {
                    if a.states.contains(&w) {
                        econ.endowment(a.player, w).to_vec()
                    } else {
                        vec![0.0; econ.goods()]
                    }
                })
                .collect(),
        )
    }

    /// Splits an original profile into its blocks.
    pub fn decompose(&self, x: &Profile) -> AuxProfile {
        let values = self
            .players
            .iter()
            .map(|a| {
                let d = self.problem.dim(a.player);
                (0..self.problem.n_states())
                    .map(|w| {
                        if a.states.contains(&w) {
                            x.value(a.player, w).to_vec()
                        } else {
                            vec![0.0; d]
                        }
                    })
                    .collect()
            })
            .collect();
        AuxProfile { values }
    }

    /// The aux profile whose members follow `cp` (blocks inside `cp`'s
    /// region) and whose other entries are zero.
    fn embed_coalition(&self, members: Coalition, cp: &CoalitionProfile) -> AuxProfile {
        let n_states = self.problem.n_states();
        let values = self
            .players
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let d = self.problem.dim(a.player);
                let strategy = members.contains(j).then(|| cp.member(a.player)).flatten();
                (0..n_states)
                    .map(|w| match strategy {
                        Some(s) if a.states.contains(&w) => s.at(w).to_vec(),
                        _ => vec![0.0; d],
                    })
                    .collect()
            })
            .collect();
        AuxProfile { values }
    }
}

impl AuxProfile {
    pub fn zero(aux: &AuxGame) -> Self {
        let p = aux.problem();
        AuxProfile {
            values: aux
                .players()
                .iter()
                .map(|a| vec![vec![0.0; p.dim(a.player)]; p.n_states()])
                .collect(),
        }
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &AuxProfile, beta: f64) -> AuxProfile {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(u, v)| u.iter().zip(v).map(|(p, q)| alpha * p + beta * q).collect())
                    .collect()
            })
            .collect();
        AuxProfile { values }
    }

    fn add_scaled(&mut self, j: usize, weight: f64, per_state: &[Vec<f64>]) {
        for (acc, v) in self.values[j].iter_mut().zip(per_state) {
            for (a, b) in acc.iter_mut().zip(v) {
                *a += weight * b;
            }
        }
    }
}

/// `L(y)_i = Σ_{K ∈ P_i} y_(i,K)`.
pub fn project_l(aux: &AuxGame, y: &AuxProfile) -> Result<Profile> {
    let p = aux.problem();
    if y.values.len() != aux.len() {
        return Err(Error::Dimension {
            expected: aux.len(),
            found: y.values.len(),
        });
    }
    let mut per_state: Vec<Vec<Vec<f64>>> = (0..p.n_players())
        .map(|i| vec![vec![0.0; p.dim(i)]; p.n_states()])
        .collect();
    for (a, values) in aux.players().iter().zip(&y.values) {
        if values.len() != p.n_states() {
            return Err(Error::Dimension {
                expected: p.n_states(),
                found: values.len(),
            });
        }
        for (w, v) in values.iter().enumerate() {
            if v.len() != p.dim(a.player) {
                return Err(Error::Dimension {
                    expected: p.dim(a.player),
                    found: v.len(),
                });
            }
            if a.states.contains(&w) {
                per_state[a.player][w] = v.clone();
            } else if v.iter().any(|&c| c != 0.0) {
                return Err(Error::Support(format!(
                    "player {} block {} is nonzero at state '{}'",
                    a.player + 1,
                    a.block + 1,
                    p.space().label(w)
                )));
            }
        }
    }
    Profile::from_states(p, per_state)
}

/// `g_j(y) = Σ_{w ∈ K} μ(w) u_i(L(y)(w), w)`.
pub fn g_utility(aux: &AuxGame, j: usize, y: &AuxProfile) -> Result<f64> {
    let a = aux.players().get(j).ok_or(Error::UnknownPlayer(j))?;
    let x = project_l(aux, y)?;
    let p = aux.problem();
    let realized = p.realized_utility(&x, a.player);
    Ok(a.states.iter().map(|&w| p.space().weight(w) * realized[w]).sum())
}

/// Payoffs in `R^J` that coalition `c` secures with `cp` (zero off `c`).
/// Games use the worst case over everyone outside the origin coalition.
pub fn coalition_payoffs(aux: &AuxGame, c: &AdmissibleCoalition, cp: &CoalitionProfile) -> Result<Vec<f64>> {
    let p = aux.problem();
    let space = p.space();
    let mut out = vec![0.0; aux.len()];
    for j in c.members.members() {
        let a = &aux.players()[j];
        let s = cp.member(a.player).ok_or(Error::UnknownPlayer(a.player))?;
        out[j] = match p {
            Problem::Economy(_) => {
                let u = p.utility(a.player);
                a.states
                    .iter()
                    .map(|&w| space.weight(w) * u.eval_unchecked(s.at(w), w))
                    .sum()
            }
            Problem::Game(_) => {
                let g = guaranteed_interim_utility_given(p, cp, a.player, p.info().partition(a.player))?;
                space.mass(&a.states) * g[a.states[0]]
            }
        };
    }
    Ok(out)
}

/// `G_C` together with the coalition strategy behind every generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicGame {
    pub ntu: NtuGame,
    /// Catalogue index of each NTU coalition.
    pub admissible: Vec<usize>,
    /// `witnesses[c][g]` achieves generator `g` of NTU coalition `c`.
    pub witnesses: Vec<Vec<CoalitionProfile>>,
    /// Grid step actually used per coalition (coarsened to fit the budget;
    /// infinite when only the status quo strategy was kept).
    pub resolutions: Vec<f64>,
    /// Grid strategies enumerated before pruning, per coalition.
    pub enumerated: Vec<usize>,
}

impl CharacteristicGame {
    /// Largest grid step used by any coalition.
    pub fn coarsest_resolution(&self) -> f64 {
        self.resolutions.iter().copied().fold(0.0, f64::max)
    }

    /// Adds a generator (and its witness) to NTU coalition `c`.
    pub fn add_generator(&mut self, c: usize, payoff: Vec<f64>, witness: CoalitionProfile) -> Result<()> {
        let mut coalitions = self.ntu.coalitions().to_vec();
        coalitions[c].generators.push(payoff);
        self.ntu = NtuGame::new(self.ntu.players(), coalitions)?;
        self.witnesses[c].push(witness);
        Ok(())
    }
}

/// Coarsenings tried before giving up on a coalition's grid.
const MAX_COARSENINGS: usize = 12;

fn grid_strategies(
    aux: &AuxGame,
    c: &AdmissibleCoalition,
    resolution: f64,
    budget: usize,
) -> Result<(f64, Vec<CoalitionProfile>)> {
    let p = aux.problem();
    let region = c.event.members();
    let layout = RegionLayout::new(p, c.origin, region);
    // Members' blocks outside the region keep the endowment (economies) or
    // the first action vertex (games).
    let filler = |i: usize, b: usize| -> Vec<f64> {
        let w = p.strategy_partition(i).block(b)[0];
        match p {
            Problem::Economy(e) => e.endowment(i, w).to_vec(),
            Problem::Game(g) => g.action_set(i).vertices()[0].clone(),
        }
    };
    let mut r = resolution;
    let mut attempt = 0;
    let raw = loop {
        let grid = match p {
            Problem::Economy(_) => economy_grid(p, &layout, r, budget),
            Problem::Game(_) => game_grid(p, &layout, r, budget),
        };
        match grid {
            Ok(raw) => break raw,
            Err(Error::BudgetExceeded { .. }) if attempt < MAX_COARSENINGS && (p.is_economy() || r < 1.0) => {
                r *= 2.0;
                attempt += 1;
            }
            Err(Error::BudgetExceeded { .. }) if budget > 0 => {
                // No grid fits: keep only the status quo strategy.
                let fallback = layout
                    .members
                    .iter()
                    .zip(&layout.blocks)
                    .map(|(&i, blocks)| blocks.iter().map(|&b| filler(i, b)).collect())
                    .collect();
                r = f64::INFINITY;
                break vec![fallback];
            }
            Err(e) => return Err(e),
        }
    };
    let profiles = raw
        .into_iter()
        .map(|per_member| {
            let strategies = layout
                .members
                .iter()
                .zip(&layout.blocks)
                .zip(per_member)
                .map(|((&i, blocks), values)| {
                    let partition = p.strategy_partition(i).clone();
                    let mut full: Vec<Vec<f64>> = (0..partition.len()).map(|b| filler(i, b)).collect();
                    for (&b, v) in blocks.iter().zip(values) {
                        full[b] = v;
                    }
                    Strategy::new(partition, full)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CoalitionProfile {
                coalition: c.origin,
                strategies,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((r, profiles))
}

/// Drops generators weakly dominated on the coalition's coordinates (keeps
/// the first of equal ones).
fn pareto_prune(members: &[usize], gens: Vec<(Vec<f64>, CoalitionProfile)>) -> Vec<(Vec<f64>, CoalitionProfile)> {
    let weakly_below = |a: &[f64], b: &[f64]| members.iter().all(|&j| a[j] <= b[j]);
    let keep: Vec<bool> = (0..gens.len())
        .map(|k| {
            !gens.iter().enumerate().any(|(l, (g, _))| {
                l != k && weakly_below(&gens[k].0, g) && (!weakly_below(g, &gens[k].0) || l < k)
            })
        })
        .collect();
    gens.into_iter().zip(keep).filter(|(_, k)| *k).map(|(g, _)| g).collect()
}

/// Enumerates grid strategies of every admissible coalition and records
/// their (guaranteed) aux payoffs as generators.
///
/// A coalition whose grid would exceed `sample_budget` is enumerated on a
/// coarser grid (step doubled until it fits, at most twelve times; past
/// that only its status quo strategy is kept). Generators that some member
/// values no more than its singleton can are dropped, since they cannot
/// dominate any point the singletons leave undominated; so are Pareto-
/// dominated ones. Generators are sorted canonically.
pub fn build_characteristic_game(aux: &AuxGame, resolution: f64, sample_budget: usize) -> Result<CharacteristicGame> {
    let built = aux
        .catalogue()
        .par_iter()
        .map(|c| {
            let (r, profiles) = grid_strategies(aux, c, resolution, sample_budget)?;
            let count = profiles.len();
            let gens = profiles
                .into_iter()
                .map(|cp| Ok((coalition_payoffs(aux, c, &cp)?, cp)))
                .collect::<Result<Vec<_>>>()?;
            Ok((r, count, gens))
        })
        .collect::<Result<Vec<_>>>()?;

    // Best singleton payoff per aux player.
    let mut autarky = vec![f64::NEG_INFINITY; aux.len()];
    for (c, (_, _, gens)) in aux.catalogue().iter().zip(&built) {
        if c.members.len() == 1 {
            let j = c.members.members().next().expect("singleton");
            for (g, _) in gens {
                autarky[j] = autarky[j].max(g[j]);
            }
        }
    }

    let mut coalitions = Vec::with_capacity(built.len());
    let mut witnesses = Vec::with_capacity(built.len());
    let mut resolutions = Vec::with_capacity(built.len());
    let mut enumerated = Vec::with_capacity(built.len());
    for (c, (r, count, gens)) in aux.catalogue().iter().zip(built) {
        let members: Vec<usize> = c.members.members().collect();
        let mut kept = if members.len() > 1 {
            let surplus = |g: &[f64]| members.iter().map(|&j| g[j] - autarky[j]).fold(f64::INFINITY, f64::min);
            let fallback = gens
                .iter()
                .max_by(|a, b| surplus(&a.0).total_cmp(&surplus(&b.0)))
                .cloned();
            let rational: Vec<_> = gens.into_iter().filter(|(g, _)| surplus(g) > 0.0).collect();
            if rational.is_empty() {
                fallback.into_iter().collect()
            } else {
                rational
            }
        } else {
            gens
        };
        kept = pareto_prune(&members, kept);
        kept.sort_by(|a, b| {
            members
                .iter()
                .map(|&j| a.0[j].total_cmp(&b.0[j]))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let (payoffs, profiles): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
        coalitions.push(NtuCoalition {
            members: c.members,
            generators: payoffs,
        });
        witnesses.push(profiles);
        resolutions.push(r);
        enumerated.push(count);
    }
    Ok(CharacteristicGame {
        ntu: NtuGame::new(aux.len(), coalitions)?,
        admissible: (0..aux.catalogue().len()).collect(),
        witnesses,
        resolutions,
        enumerated,
    })
}

/// `y_j = Σ_{S ∋ j} δ_S y^S_j` over weighted generator columns
/// `(coalition, generator, weight)`; weights are renormalized per aux
/// player so that each `j` receives total weight one.
pub fn balancing_combination(aux: &AuxGame, game: &CharacteristicGame, columns: &[(usize, usize, f64)]) -> Result<AuxProfile> {
    let mut y = AuxProfile::zero(aux);
    let mut total = vec![0.0; aux.len()];
    for &(c, g, w) in columns {
        let members = game.ntu.coalitions()[c].members;
        let part = aux.embed_coalition(members, &game.witnesses[c][g]);
        for j in members.members() {
            y.add_scaled(j, w, &part.values[j]);
            total[j] += w;
        }
    }
    for (j, &t) in total.iter().enumerate() {
        if t <= 0.0 {
            return Err(Error::Witness(format!("aux player {} gets no weight", j + 1)));
        }
        for v in y.values[j].iter_mut().flatten() {
            *v /= t;
        }
    }
    Ok(y)
}

/// Convex combination of the grand coalition's witnesses.
pub fn grand_combination(aux: &AuxGame, game: &CharacteristicGame, weights: &[f64]) -> Result<AuxProfile> {
    let grand = Coalition::grand(aux.len());
    let c = game
        .ntu
        .coalitions()
        .iter()
        .position(|c| c.members == grand)
        .ok_or_else(|| Error::Witness("the grand coalition is missing".into()))?;
    if weights.len() != game.witnesses[c].len() {
        return Err(Error::Dimension {
            expected: game.witnesses[c].len(),
            found: weights.len(),
        });
    }
    let columns: Vec<(usize, usize, f64)> = weights.iter().enumerate().map(|(g, &w)| (c, g, w)).collect();
    balancing_combination(aux, game, &columns)
}

/// A lifted profile and its per-aux-player slack `g_j(y) − v_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub profile: Profile,
    pub aux_profile: AuxProfile,
    pub slack: Vec<f64>,
}

impl Lift {
    pub fn min_slack(&self) -> f64 {
        self.slack.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `L(witness)`, after checking that the witness is feasible and achieves
/// `g_j ≥ v_j` for every aux player.
pub fn lift_core_point(aux: &AuxGame, v: &[f64], witness: &AuxProfile) -> Result<Lift> {
    if v.len() != aux.len() {
        return Err(Error::Dimension {
            expected: aux.len(),
            found: v.len(),
        });
    }
    let profile = project_l(aux, witness)?;
    profile
        .check_valid(aux.problem())
        .map_err(|e| Error::Witness(format!("lifted profile is infeasible: {e}")))?;
    let slack = (0..aux.len())
        .map(|j| Ok(g_utility(aux, j, witness)? - v[j]))
        .collect::<Result<Vec<f64>>>()?;
    if let Some((j, s)) = slack
        .iter()
        .enumerate()
        .find(|(j, &s)| s < -CORE_TOLERANCE * (1.0 + v[*j].abs()))
    {
        return Err(Error::Witness(format!("aux player {} falls short by {}", j + 1, -s)));
    }
    Ok(Lift {
        profile,
        aux_profile: witness.clone(),
        slack,
    })
}
