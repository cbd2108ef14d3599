//! Blocking tests and core membership.
//!
//! Every blocker reduces to one linear program (see [`blocking_lp`]): find a
//! coalition strategy maximizing the smallest margin
//! `E(U_i(y)|C_i)_w − E(U_i(x)|C_i)_w − ε` over the members `i` and the
//! required states `w`, where `C_i` is the conditioning partition of the
//! concept. Games use guaranteed (worst-case over opponents) utility for
//! the challenger. A block exists iff the optimum exceeds [`STRICTNESS`];
//! every returned certificate has been re-verified by direct recomputation.

mod program;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use program::STRICTNESS;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::games::{
    guaranteed_interim_utility_given, interim_utility_given, profile_grid, CoalitionProfile, Problem, Profile,
};
use crate::probability::{events_of, meet_over, Event, Partition};
use program::Query;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "concept", rename_all = "snake_case")]
pub enum CoreConcept {
    /// Blocking on common-knowledge events of the coalition.
    InterimCore { epsilon: f64 },
    /// Blocking must improve at every state.
    PrivateCore,
    /// Blocking need only improve at one state.
    WeakInterimPrivate,
    /// Interim core with each player conditioning on `fields[i]`, which must
    /// refine the player's own partition.
    InterimFine { fields: Vec<Partition>, epsilon: f64 },
    /// Ex ante blocking: expected utilities over the whole state space.
    WeakCoreFlat { epsilon: f64 },
}

impl CoreConcept {
    pub fn interim(epsilon: f64) -> Self {
        CoreConcept::InterimCore { epsilon }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CoreConcept::InterimCore { .. } => "interim",
            CoreConcept::PrivateCore => "private",
            CoreConcept::WeakInterimPrivate => "weak-interim-private",
            CoreConcept::InterimFine { .. } => "fine",
            CoreConcept::WeakCoreFlat { .. } => "weak-core",
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            CoreConcept::InterimCore { epsilon }
            | CoreConcept::InterimFine { epsilon, .. }
            | CoreConcept::WeakCoreFlat { epsilon } => *epsilon,
            CoreConcept::PrivateCore | CoreConcept::WeakInterimPrivate => 0.0,
        }
    }

    pub fn check(&self, problem: &Problem) -> Result<()> {
        let eps = self.epsilon();
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidProblem(format!("epsilon must be nonnegative, got {eps}")));
        }
        if let CoreConcept::InterimFine { fields, .. } = self {
            check_fields(problem, fields)?;
        }
        Ok(())
    }

    /// Conditioning partition per player.
    fn conditioning(&self, problem: &Problem) -> Vec<Partition> {
        let n = problem.n_players();
        match self {
            CoreConcept::InterimFine { fields, .. } => fields.clone(),
            CoreConcept::WeakCoreFlat { .. } => vec![Partition::trivial(problem.n_states()); n],
            _ => problem.info().partitions().to_vec(),
        }
    }

    /// Margin-state sets to try for a coalition, in canonical order.
    fn events(&self, problem: &Problem, coalition: Coalition, conditioning: &[Partition]) -> Result<Vec<Event>> {
        let n_states = problem.n_states();
        Ok(match self {
            CoreConcept::InterimCore { .. } | CoreConcept::InterimFine { .. } => {
                events_of(&meet_over(conditioning, coalition)?)
            }
            CoreConcept::PrivateCore | CoreConcept::WeakCoreFlat { .. } => vec![Event::full(n_states)],
            CoreConcept::WeakInterimPrivate => (0..n_states).map(Event::single).collect(),
        })
    }

    /// Whether `event` is a legitimate margin set for `coalition`.
    fn admits(&self, problem: &Problem, coalition: Coalition, conditioning: &[Partition], event: &Event) -> Result<bool> {
        let n_states = problem.n_states();
        Ok(match self {
            CoreConcept::InterimCore { .. } | CoreConcept::InterimFine { .. } => {
                !event.is_empty() && meet_over(conditioning, coalition)?.measures(event)
            }
            CoreConcept::PrivateCore | CoreConcept::WeakCoreFlat { .. } => *event == Event::full(n_states),
            CoreConcept::WeakInterimPrivate => event.len() == 1,
        })
    }
}

fn check_fields(problem: &Problem, fields: &[Partition]) -> Result<()> {
    if fields.len() != problem.n_players() {
        return Err(Error::InvalidField(format!(
            "{} fields for {} players",
            fields.len(),
            problem.n_players()
        )));
    }
    for (i, h) in fields.iter().enumerate() {
        if !h.is_finer_than(problem.info().partition(i)) {
            return Err(Error::InvalidField(format!(
                "field of player {} does not refine the player's own partition",
                i + 1
            )));
        }
    }
    Ok(())
}

/// A coalition, an event and a strategy for the coalition that raises every
/// member's (guaranteed) conditional utility above the status quo by more
/// than ε at every state of the event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockingCertificate {
    pub coalition: Coalition,
    /// States where the improvement is required.
    pub event: Event,
    pub profile: CoalitionProfile,
    pub epsilon: f64,
    /// `[member][state of event]`: challenger minus status quo minus ε.
    pub margins: Vec<Vec<f64>>,
    /// Optimal worst margin of the blocking program.
    pub lp_value: f64,
}

impl BlockingCertificate {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreVerdict {
    pub member: bool,
    pub certificate: Option<BlockingCertificate>,
    /// Coalition/event pairs examined.
    pub subproblems: usize,
    pub search: String,
}

struct Context {
    conditioning: Vec<Partition>,
    /// Status-quo conditional utilities per player.
    status_quo: Vec<Vec<f64>>,
}

impl Context {
    fn new(problem: &Problem, x: &Profile, concept: &CoreConcept) -> Result<Self> {
        let conditioning = concept.conditioning(problem);
        let status_quo = (0..problem.n_players())
            .map(|i| interim_utility_given(problem, x, i, &conditioning[i]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Context {
            conditioning,
            status_quo,
        })
    }
}

fn check_coalition(problem: &Problem, coalition: Coalition) -> Result<()> {
    if coalition.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    if let Some(i) = coalition.members().find(|&i| i >= problem.n_players()) {
        return Err(Error::UnknownPlayer(i));
    }
    Ok(())
}

fn margins(
    problem: &Problem,
    x: &Profile,
    cert_profile: &CoalitionProfile,
    event: &Event,
    conditioning: &[Partition],
    epsilon: f64,
) -> Result<Vec<Vec<f64>>> {
    cert_profile
        .coalition
        .members()
        .map(|i| {
            let challenger = guaranteed_interim_utility_given(problem, cert_profile, i, &conditioning[i])?;
            let status = interim_utility_given(problem, x, i, &conditioning[i])?;
            Ok(event.members().iter().map(|&w| challenger[w] - status[w] - epsilon).collect())
        })
        .collect()
}

fn search_one(
    problem: &Problem,
    x: &Profile,
    ctx: &Context,
    coalition: Coalition,
    event: &Event,
    epsilon: f64,
) -> Result<Option<BlockingCertificate>> {
    let q = Query {
        coalition,
        margin_states: event.members(),
        conditioning: &ctx.conditioning,
        epsilon,
    };
    let Some(solved) = program::solve(problem, x, &q, &ctx.status_quo)? else {
        return Ok(None);
    };
    let mut candidates = Vec::with_capacity(2);
    if let Some(c) = solved.centered {
        candidates.push(c);
    }
    candidates.push(solved.primary);
    for profile in candidates {
        if profile.check_valid(problem).is_err() {
            continue;
        }
        let m = margins(problem, x, &profile, event, &ctx.conditioning, epsilon)?;
        if m.iter().flatten().all(|&v| v > STRICTNESS) {
            return Ok(Some(BlockingCertificate {
                coalition,
                event: event.clone(),
                profile,
                epsilon,
                margins: m,
                lp_value: solved.value,
            }));
        }
    }
    Err(Error::Lp(format!(
        "optimal margin {} for {coalition} did not survive re-verification",
        solved.value
    )))
}

/// The blocking program: returns a coalition strategy whose worst margin
/// over members and `margin_states` is positive, if one exists.
pub fn blocking_lp(
    problem: &Problem,
    x: &Profile,
    coalition: Coalition,
    margin_states: &Event,
    epsilon: f64,
    conditioning: &[Partition],
) -> Result<Option<CoalitionProfile>> {
    problem.ensure_valid()?;
    check_coalition(problem, coalition)?;
    x.check_valid(problem)?;
    if conditioning.len() != problem.n_players() {
        return Err(Error::InvalidField("one conditioning partition per player is required".into()));
    }
    let status_quo = (0..problem.n_players())
        .map(|i| interim_utility_given(problem, x, i, &conditioning[i]))
        .collect::<Result<Vec<_>>>()?;
    let q = Query {
        coalition,
        margin_states: margin_states.members(),
        conditioning,
        epsilon,
    };
    Ok(program::solve(problem, x, &q, &status_quo)?.map(|s| s.centered.unwrap_or(s.primary)))
}

fn blocks_with(
    problem: &Problem,
    x: &Profile,
    concept: &CoreConcept,
    coalition: Coalition,
    event: &Event,
) -> Result<Option<BlockingCertificate>> {
    problem.ensure_valid()?;
    concept.check(problem)?;
    check_coalition(problem, coalition)?;
    let ctx = Context::new(problem, x, concept)?;
    if !concept.admits(problem, coalition, &ctx.conditioning, event)? {
        return Err(Error::NotCommonKnowledge);
    }
    search_one(problem, x, &ctx, coalition, event, concept.epsilon())
}

/// Does `coalition` block `x` on the common-knowledge event `event`?
pub fn blocks_interim(
    problem: &Problem,
    x: &Profile,
    coalition: Coalition,
    event: &Event,
    epsilon: f64,
) -> Result<Option<BlockingCertificate>> {
    blocks_with(problem, x, &CoreConcept::InterimCore { epsilon }, coalition, event)
}

/// Blocking that must improve every member at every state.
pub fn blocks_private(problem: &Problem, x: &Profile, coalition: Coalition) -> Result<Option<BlockingCertificate>> {
    let all = Event::full(problem.n_states());
    blocks_with(problem, x, &CoreConcept::PrivateCore, coalition, &all)
}

/// Blocking that only needs an improvement at the state `w0`.
pub fn blocks_weak_interim_private(
    problem: &Problem,
    x: &Profile,
    coalition: Coalition,
    w0: usize,
) -> Result<Option<BlockingCertificate>> {
    if w0 >= problem.n_states() {
        return Err(Error::StateSpace(format!("state index {w0} out of range")));
    }
    blocks_with(problem, x, &CoreConcept::WeakInterimPrivate, coalition, &Event::single(w0))
}

/// Interim blocking with enlarged information fields `fields[i] ⊇ P_i`.
pub fn blocks_fine(
    problem: &Problem,
    x: &Profile,
    coalition: Coalition,
    event: &Event,
    fields: &[Partition],
    epsilon: f64,
) -> Result<Option<BlockingCertificate>> {
    let concept = CoreConcept::InterimFine {
        fields: fields.to_vec(),
        epsilon,
    };
    blocks_with(problem, x, &concept, coalition, event)
}

/// Ex ante blocking on the whole state space.
pub fn blocks_ex_ante(
    problem: &Problem,
    x: &Profile,
    coalition: Coalition,
    epsilon: f64,
) -> Result<Option<BlockingCertificate>> {
    let all = Event::full(problem.n_states());
    blocks_with(problem, x, &CoreConcept::WeakCoreFlat { epsilon }, coalition, &all)
}

/// Searches all coalitions (by size, then lexicographically) and all their
/// admissible events (canonical order); returns the first block found.
pub fn in_core(problem: &Problem, x: &Profile, concept: &CoreConcept) -> Result<CoreVerdict> {
    problem.ensure_valid()?;
    concept.check(problem)?;
    x.check_valid(problem)?;
    in_core_checked(problem, x, concept)
}

fn in_core_checked(problem: &Problem, x: &Profile, concept: &CoreConcept) -> Result<CoreVerdict> {
    let ctx = Context::new(problem, x, concept)?;
    let coalitions = crate::coalition::Coalition::all_nonempty(problem.n_players());
    let mut subproblems = 0;
    for &s in &coalitions {
        for event in concept.events(problem, s, &ctx.conditioning)? {
            subproblems += 1;
            if let Some(cert) = search_one(problem, x, &ctx, s, &event, concept.epsilon())? {
                return Ok(CoreVerdict {
                    member: false,
                    certificate: Some(cert),
                    subproblems,
                    search: format!("stopped at coalition {s} after {subproblems} subproblems"),
                });
            }
        }
    }
    Ok(CoreVerdict {
        member: true,
        certificate: None,
        subproblems,
        search: format!(
            "all {} coalitions and their {subproblems} {} events",
            coalitions.len(),
            concept.name()
        ),
    })
}

/// Re-checks a certificate without searching; returns the recomputed margins.
pub fn verify_certificate(
    problem: &Problem,
    x: &Profile,
    concept: &CoreConcept,
    cert: &BlockingCertificate,
) -> Result<Vec<Vec<f64>>> {
    problem.ensure_valid()?;
    concept.check(problem)?;
    x.check_valid(problem)?;
    check_coalition(problem, cert.coalition)?;
    if cert.profile.coalition != cert.coalition {
        return Err(Error::Certificate("profile belongs to a different coalition".into()));
    }
    cert.profile
        .check_valid(problem)
        .map_err(|e| Error::Certificate(format!("blocking strategy is not admissible: {e}")))?;
    if let Some(&w) = cert.event.members().iter().find(|&&w| w >= problem.n_states()) {
        return Err(Error::Certificate(format!("event names state {w}, which does not exist")));
    }
    let conditioning = concept.conditioning(problem);
    if !concept.admits(problem, cert.coalition, &conditioning, &cert.event)? {
        return Err(Error::Certificate(format!(
            "event is not admissible for {} under the {} concept",
            cert.coalition,
            concept.name()
        )));
    }
    let m = margins(problem, x, &cert.profile, &cert.event, &conditioning, concept.epsilon())?;
    if let Some(v) = m.iter().flatten().find(|&&v| v <= STRICTNESS) {
        return Err(Error::Certificate(format!("margin {v} is not strictly positive")));
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub concept: CoreConcept,
    pub resolution: f64,
    pub profiles: usize,
    pub members: usize,
    /// Membership of each grid profile, in grid order.
    pub membership: Vec<bool>,
    pub sample_members: Vec<Profile>,
    /// `(grid index, profile, certificate)` for the first blocked profiles.
    pub sample_blocked: Vec<(usize, Profile, BlockingCertificate)>,
}

/// Runs [`in_core`] on every grid profile.
pub fn core_grid_scan(
    problem: &Problem,
    concept: &CoreConcept,
    resolution: f64,
    budget: usize,
    keep: usize,
) -> Result<ScanReport> {
    concept.check(problem)?;
    let grid = profile_grid(problem, resolution, budget)?;
    scan_profiles(problem, concept, resolution, grid, keep)
}

pub(crate) fn scan_profiles(
    problem: &Problem,
    concept: &CoreConcept,
    resolution: f64,
    grid: Vec<Profile>,
    keep: usize,
) -> Result<ScanReport> {
    let verdicts = grid
        .par_iter()
        .map(|x| in_core_checked(problem, x, concept))
        .collect::<Result<Vec<_>>>()?;
    let membership: Vec<bool> = verdicts.iter().map(|v| v.member).collect();
    let members = membership.iter().filter(|&&m| m).count();
    let sample_members = grid
        .iter()
        .zip(&membership)
        .filter(|(_, &m)| m)
        .take(keep)
        .map(|(x, _)| x.clone())
        .collect();
    let sample_blocked = verdicts
        .into_iter()
        .enumerate()
        .filter_map(|(k, v)| v.certificate.map(|c| (k, grid[k].clone(), c)))
        .take(keep)
        .collect();
    Ok(ScanReport {
        concept: concept.clone(),
        resolution,
        profiles: grid.len(),
        members,
        membership,
        sample_members,
        sample_blocked,
    })
}

#[cfg(test)]
mod tests;
