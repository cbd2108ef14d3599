//! The existence pipeline: auxiliary game → `G_C` → Scarf → lift → core
//! certification, with optional cutting-plane refinement.

use serde::{Deserialize, Serialize};

use super::{
    balancing_combination, build_auxiliary_game, build_characteristic_game, coalition_payoffs, grand_combination,
    lift_core_point, AuxPlayer, Lift,
};
use crate::blocking::{in_core, CoreConcept, CoreVerdict};
use crate::error::{Error, Result};
use crate::games::Problem;
use crate::scarf::{
    check_scarf_conditions, enumerate_balanced_collections, scarf_terminal,
    BalancedCollection, ConditionsReport,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub resolution: f64,
    /// Grid strategies allowed per admissible coalition.
    pub sample_budget: usize,
    /// Blocking certificates fed back into `G_C` as extra generators.
    pub refinement_rounds: usize,
    pub pivot_budget: Option<usize>,
    /// Run the balancedness check when `|J|` is at most this.
    pub conditions_up_to: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            resolution: 0.25,
            sample_budget: 4096,
            refinement_rounds: 25,
            pivot_budget: None,
            conditions_up_to: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificationLevel {
    /// Not blocked at ε = 0.
    Exact,
    /// Not blocked at the grid tolerance `grid_epsilon`.
    Grid,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub level: CertificationLevel,
    /// Tolerance matching the coarsest grid step actually used.
    pub grid_epsilon: f64,
    pub exact: CoreVerdict,
    pub at_grid: Option<CoreVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub aux_players: Vec<AuxPlayer>,
    pub admissible_coalitions: usize,
    pub generators: usize,
    pub coarsest_resolution: f64,
    pub conditions: Option<ConditionsReport>,
    /// Scarf payoff `u ∈ R^J` of the final round.
    pub payoff: Vec<f64>,
    pub collection: BalancedCollection,
    pub pivots: usize,
    /// Whether the grand coalition's generators reach `u` on their own.
    pub achievable: bool,
    pub lift: Lift,
    /// Scarf runs performed (one plus the refinements used).
    pub rounds: usize,
    pub certification: Certification,
}

fn grid_epsilon(problem: &Problem, resolution: f64) -> f64 {
    let n = problem.n_players() as f64;
    let lip = problem.utilities().iter().map(|u| u.lipschitz()).fold(0.0, f64::max);
    match problem {
        Problem::Economy(_) => (n - 1.0) * resolution * lip,
        Problem::Game(g) => {
            let spread = (0..problem.n_players())
                .map(|i| {
                    let vs = g.action_set(i).vertices();
                    let diam = vs
                        .iter()
                        .flat_map(|a| vs.iter().map(move |b| a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)))
                        .fold(0.0, f64::max);
                    diam * vs.len() as f64
                })
                .fold(0.0, f64::max);
            n * resolution * lip * spread
        }
    }
}

/// Runs the whole route and certifies the lifted profile with [`in_core`].
///
/// Economies lift Scarf's terminal columns by the balancing combination,
/// which is feasible and (by concavity) gives every aux player at least its
/// Scarf payoff. Games lift through the grand coalition's generators and so
/// require `u` to be achievable. If the lifted profile is blocked, the
/// blocking strategy becomes a new generator and Scarf is re-run, up to
/// `refinement_rounds` times.
pub fn solve(problem: &Problem, options: &SolveOptions) -> Result<SolveOutcome> {
    let aux = build_auxiliary_game(problem).map_err(Error::at("auxiliary game"))?;
    let mut game = build_characteristic_game(&aux, options.resolution, options.sample_budget)
        .map_err(Error::at("characteristic game"))?;
    let conditions = if aux.len() <= options.conditions_up_to {
        let collections = enumerate_balanced_collections(aux.len(), aux.len()).map_err(Error::at("conditions"))?;
        Some(check_scarf_conditions(&game.ntu, &collections).map_err(Error::at("conditions"))?)
    } else {
        None
    };
    let concept = CoreConcept::interim(0.0);
    let mut rounds = 0;
    loop {
        rounds += 1;
        let terminal = scarf_terminal(&game.ntu, options.pivot_budget).map_err(Error::at("scarf"))?;
        let grand_weights = game.ntu.achieves(&terminal.payoff).map_err(Error::at("scarf"))?;
        let achievable = grand_weights.is_some();
        let witness = match (problem.is_economy(), grand_weights) {
            (true, _) => balancing_combination(&aux, &game, &terminal.columns).map_err(Error::at("lift"))?,
            (false, Some(weights)) => grand_combination(&aux, &game, &weights).map_err(Error::at("lift"))?,
            (false, None) => {
                return Err(Error::at("scarf")(Error::NotAchievable {
                    basis: terminal.basis,
                }))
            }
        };
        let lift = lift_core_point(&aux, &terminal.payoff, &witness).map_err(Error::at("lift"))?;
        let exact = in_core(problem, &lift.profile, &concept).map_err(Error::at("certify"))?;
        let refine = rounds <= options.refinement_rounds;
        if let (false, true, Some(cert)) = (exact.member, refine, exact.certificate.as_ref()) {
            let c = aux
                .admissible(cert.coalition, &cert.event)
                .ok_or_else(|| Error::at("refine")(Error::Certificate("blocking event is not admissible".into())))?;
            let payoff = coalition_payoffs(&aux, &aux.catalogue()[c], &cert.profile).map_err(Error::at("refine"))?;
            game.add_generator(c, payoff, cert.profile.clone())
                .map_err(Error::at("refine"))?;
            continue;
        }
        let eps = grid_epsilon(problem, game.coarsest_resolution());
        let (level, at_grid) = if exact.member {
            (CertificationLevel::Exact, None)
        } else if !eps.is_finite() {
            (CertificationLevel::Failed, None)
        } else {
            let v = in_core(problem, &lift.profile, &CoreConcept::interim(eps)).map_err(Error::at("certify"))?;
            let level = if v.member {
                CertificationLevel::Grid
            } else {
                CertificationLevel::Failed
            };
            (level, Some(v))
        };
        return Ok(SolveOutcome {
            aux_players: aux.players().to_vec(),
            admissible_coalitions: aux.catalogue().len(),
            generators: game.ntu.total_generators(),
            coarsest_resolution: game.coarsest_resolution(),
            conditions,
            payoff: terminal.payoff,
            collection: terminal.collection,
            pivots: terminal.pivots,
            achievable,
            lift,
            rounds,
            certification: Certification {
                level,
                grid_epsilon: eps,
                exact,
                at_grid,
            },
        });
    }
}
