//! Strategy profiles written as text.
//!
//! Players are separated by `;` (or newlines); each player is either one
//! bundle used in every state, `1,0.5`, or a bundle per state label,
//! `a:1,0.5 | b:0,2`. `#` starts a comment. For `1 ; a:0.5|b:0.5 ; 1`
//! in a one-good economy, player 2 gets half a unit in both states.

use interim_core::games::{Problem, Profile};

use crate::number::{Number, NumberError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileSpecError {
    #[error(transparent)]
    Number(#[from] NumberError),
    #[error("expected {expected} players, found {found}")]
    PlayerCount { expected: usize, found: usize },
    #[error("player {player}: {message}")]
    Player { player: usize, message: String },
    #[error("profile is not admissible: {0}")]
    Invalid(String),
}

/// A parsed profile: `[player][state] -> bundle`, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSpec {
    pub players: Vec<PlayerValues>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlayerValues {
    All(Vec<Number>),
    ByState(Vec<(String, Vec<Number>)>),
}

fn bundle(text: &str) -> Result<Vec<Number>, NumberError> {
    text.split(',').map(|t| t.trim().parse()).collect()
}

impl ProfileSpec {
    pub fn parse(text: &str) -> Result<ProfileSpec, ProfileSpecError> {
        let stripped: String = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .collect::<Vec<_>>()
            .join(";");
        let mut players = Vec::new();
        for (i, part) in stripped.split(';').map(str::trim).filter(|p| !p.is_empty()).enumerate() {
            let values = if part.contains(':') {
                let mut by_state = Vec::new();
                for item in part.split('|') {
                    let (label, b) = item.split_once(':').ok_or_else(|| ProfileSpecError::Player {
                        player: i + 1,
                        message: format!("expected 'state:bundle', found '{}'", item.trim()),
                    })?;
                    let label = label.trim();
                    if label.is_empty() || by_state.iter().any(|(l, _)| l == label) {
                        return Err(ProfileSpecError::Player {
                            player: i + 1,
                            message: format!("empty or repeated state label '{label}'"),
                        });
                    }
                    by_state.push((label.to_string(), bundle(b)?));
                }
                PlayerValues::ByState(by_state)
            } else {
                PlayerValues::All(bundle(part)?)
            };
            players.push(values);
        }
        Ok(ProfileSpec { players })
    }

    /// Per-state values as floats, `[player][state][coordinate]`.
    pub fn state_values(&self, problem: &Problem) -> Result<Vec<Vec<Vec<f64>>>, ProfileSpecError> {
        let n = problem.n_players();
        if self.players.len() != n {
            return Err(ProfileSpecError::PlayerCount {
                expected: n,
                found: self.players.len(),
            });
        }
        let space = problem.space();
        let floats = |b: &[Number]| b.iter().map(|x| x.to_f64()).collect::<Vec<_>>();
        self.players
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let per_state: Vec<Vec<f64>> = match p {
                    PlayerValues::All(b) => vec![floats(b); space.len()],
                    PlayerValues::ByState(items) => {
                        if let Some((l, _)) = items.iter().find(|(l, _)| space.index_of(l).is_none()) {
                            return Err(ProfileSpecError::Player {
                                player: i + 1,
                                message: format!("unknown state '{l}'"),
                            });
                        }
                        space
                            .labels()
                            .iter()
                            .map(|l| {
                                items
                                    .iter()
                                    .find(|(k, _)| k == l)
                                    .map(|(_, b)| floats(b))
                                    .ok_or_else(|| ProfileSpecError::Player {
                                        player: i + 1,
                                        message: format!("missing state '{l}'"),
                                    })
                            })
                            .collect::<Result<_, _>>()?
                    }
                };
                if let Some(b) = per_state.iter().find(|b| b.len() != problem.dim(i)) {
                    return Err(ProfileSpecError::Player {
                        player: i + 1,
                        message: format!("bundle has {} coordinates, expected {}", b.len(), problem.dim(i)),
                    });
                }
                Ok(per_state)
            })
            .collect()
    }

    /// Builds and checks the profile against `problem`.
    pub fn to_profile(&self, problem: &Problem) -> Result<Profile, ProfileSpecError> {
        let values = self.state_values(problem)?;
        let x = Profile::from_states(problem, values).map_err(|e| ProfileSpecError::Invalid(e.to_string()))?;
        x.check_valid(problem).map_err(|e| ProfileSpecError::Invalid(e.to_string()))?;
        Ok(x)
    }
}

/// The text form of a profile, exact for dyadic and decimal values.
pub fn format_profile(problem: &Problem, x: &Profile) -> String {
    let show = |b: &[f64]| {
        b.iter()
            .map(|&v| Number::from_f64(v).map_or_else(|_| v.to_string(), |n| n.to_string()))
            .collect::<Vec<_>>()
            .join(",")
    };
    (0..x.n_players())
        .map(|i| {
            let per_state: Vec<&[f64]> = (0..problem.n_states()).map(|w| x.value(i, w)).collect();
            if per_state.windows(2).all(|p| p[0] == p[1]) {
                show(per_state[0])
            } else {
                per_state
                    .iter()
                    .enumerate()
                    .map(|(w, b)| format!("{}:{}", problem.space().label(w), show(b)))
                    .collect::<Vec<_>>()
                    .join("|")
            }
        })
        .collect::<Vec<_>>()
        .join("; ")
}
