use super::{AffinePiece, Economy, NormalFormGame, Problem, Profile, UtilitySpec};
use crate::error::{Error, Result};
use crate::probability::{is_measurable, InformationStructure, Partition, StateSpace};

/// Pieces generated when averaging utilities over one block.
const MAX_AVERAGED_PIECES: usize = 4096;

fn lift_partition(p: &Partition, h: &Partition) -> Result<Partition> {
    // Every block of `p` is a union of `h` blocks.
    let labels: Vec<usize> = h.blocks().iter().map(|b| p.block_of(b[0])).collect();
    let remapped = Partition::from_labels(&labels);
    Partition::new(h.len(), remapped.blocks().to_vec())
}

/// `Σ_w (μ_w/μ_B) min_k φ_{w,k}` as a single min of affine pieces.
fn average_pieces(parts: &[(f64, &[AffinePiece])], dim: usize) -> Result<Vec<AffinePiece>> {
    let mut acc = vec![AffinePiece::new(vec![0.0; dim], 0.0)];
    for &(weight, pieces) in parts {
        if acc.len() * pieces.len() > MAX_AVERAGED_PIECES {
            return Err(Error::BudgetExceeded {
                what: "averaged utility pieces",
                estimate: (acc.len() * pieces.len()) as u128,
                budget: MAX_AVERAGED_PIECES,
            });
        }
        let mut next = Vec::with_capacity(acc.len() * pieces.len());
        for a in &acc {
            for p in pieces {
                let coef = a.coef.iter().zip(&p.coef).map(|(x, c)| x + weight * c).collect();
                next.push(AffinePiece::new(coef, a.intercept + weight * p.intercept));
            }
        }
        next.dedup();
        acc = next;
    }
    Ok(acc)
}

fn average_utility(u: &UtilitySpec, h: &Partition, space: &StateSpace) -> Result<UtilitySpec> {
    let per_state = h
        .blocks()
        .iter()
        .map(|b| {
            let mass = space.mass(b);
            let parts: Vec<(f64, &[AffinePiece])> =
                b.iter().map(|&w| (space.weight(w) / mass, u.pieces(w))).collect();
            average_pieces(&parts, u.dim())
        })
        .collect::<Result<Vec<_>>>()?;
    UtilitySpec::new(u.dim(), per_state)
}

/// The problem seen through an information field `H` lying between the
/// pooled partition and the full state space: states become the blocks of
/// `H`, the prior their masses, and utilities their conditional averages.
/// Since every strategy is constant on `H` blocks, interim utilities of
/// corresponding profiles are unchanged.
pub fn restrict_to_field(problem: &Problem, h: &Partition) -> Result<Problem> {
    let space = problem.space();
    if h.n_states() != space.len() {
        return Err(Error::SpaceMismatch {
            left: space.len(),
            right: h.n_states(),
        });
    }
    if !problem.info().join().is_coarser_than(h) {
        return Err(Error::InvalidField(
            "the field must be finer than or equal to the pooled information partition".into(),
        ));
    }
    if let Problem::Economy(e) = problem {
        for (i, end) in e.endowments().iter().enumerate() {
            if !is_measurable(end, h) {
                return Err(Error::InvalidField(format!(
                    "endowment of player {} is not measurable for the field",
                    i + 1
                )));
            }
        }
    }
    let labels = h
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&w| space.label(w)).collect::<Vec<_>>().join("+"))
        .collect();
    let prior = h.blocks().iter().map(|b| space.mass(b)).collect::<Vec<_>>();
    let total: f64 = prior.iter().sum();
    let prior = prior.into_iter().map(|p| p / total).collect();
    let new_space = StateSpace::new(labels, prior)?;
    let partitions = problem
        .info()
        .partitions()
        .iter()
        .map(|p| lift_partition(p, h))
        .collect::<Result<Vec<_>>>()?;
    let info = InformationStructure::new(partitions)?;
    let utilities = problem
        .utilities()
        .iter()
        .map(|u| average_utility(u, h, space))
        .collect::<Result<Vec<_>>>()?;
    Ok(match problem {
        Problem::Economy(e) => {
            let endowments = e
                .endowments()
                .iter()
                .map(|end| h.blocks().iter().map(|b| end[b[0]].clone()).collect())
                .collect();
            Problem::Economy(Economy::new(new_space, info, e.goods(), endowments, utilities, e.delivery)?)
        }
        Problem::Game(g) => Problem::Game(NormalFormGame::new(
            new_space,
            info,
            g.actions.clone(),
            utilities,
            g.delivery,
        )?),
    })
}

/// Carries a profile of `original` over to `restricted = restrict_to_field(original, h)`.
pub fn restrict_profile(original: &Problem, h: &Partition, restricted: &Problem, x: &Profile) -> Result<Profile> {
    x.check_valid(original)?;
    if restricted.n_states() != h.len() {
        return Err(Error::SpaceMismatch {
            left: restricted.n_states(),
            right: h.len(),
        });
    }
    let values = (0..original.n_players())
        .map(|i| h.blocks().iter().map(|b| x.value(i, b[0]).to_vec()).collect())
        .collect();
    Profile::from_states(restricted, values)
}
