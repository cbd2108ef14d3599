//! TOML problem files.
//!
//! ```toml
//! kind = "economy"          # or "game"
//! delivery = "interim"      # or "ex_post"
//! goods = 1                 # economies only
//!
//! [states]
//! labels = ["a", "b"]
//! prior = ["1/2", "1/2"]
//!
//! [[players]]
//! name = "1"
//! partition = [["a", "b"]]
//! endowment = ["1"]                          # same bundle in every state
//! utility = [{ coef = ["1"] }]               # same pieces in every state
//!
//! [[players]]
//! name = "2"
//! partition = [["a"], ["b"]]
//! endowment = { a = ["1"], b = ["1"] }       # or per state
//! utility = { a = [{ coef = ["1"] }], b = [{ coef = ["-1"], intercept = "1" }] }
//! ```
//!
//! Games replace `goods`/`endowment` with `actions`, the vertices of each
//! player's action polytope; utility coefficients then range over the
//! joint action (players in order). Numbers may be TOML integers, decimal
//! or ratio strings, or TOML floats (read through their shortest decimal
//! form); all are converted exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use interim_core::games::{ActionSet, AffinePiece, Delivery, Economy, NormalFormGame, Problem, UtilitySpec};
use interim_core::probability::{InformationStructure, Partition, StateSpace};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::number::{Number, NumberError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Economy,
    Game,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryStage {
    ExPost,
    Interim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct States {
    pub labels: Vec<Spanned<String>>,
    pub prior: Spanned<Vec<Number>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub coef: Vec<Number>,
    #[serde(default = "zero", skip_serializing_if = "is_zero")]
    pub intercept: Number,
}

fn zero() -> Number {
    Number(0.into())
}

fn is_zero(n: &Number) -> bool {
    n.0 == 0.into()
}

/// A value shared by every state, or one value per state label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerState<T> {
    All(T),
    ByState(BTreeMap<String, T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub partition: Spanned<Vec<Vec<Spanned<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endowment: Option<Spanned<PerState<Vec<Number>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Spanned<Vec<Vec<Number>>>>,
    pub utility: Spanned<PerState<Vec<Piece>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: Kind,
    pub delivery: DeliveryStage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goods: Option<usize>,
    pub states: States,
    pub players: Vec<PlayerFile>,
}

/// A located problem-file error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for Diagnostic {}

fn locate(source: &str, span: Option<Range<usize>>, message: impl Into<String>) -> Diagnostic {
    let message = message.into();
    let Some(span) = span else {
        return Diagnostic {
            line: 0,
            column: 0,
            message,
        };
    };
    let upto = &source[..span.start.min(source.len())];
    let line = upto.matches('\n').count() + 1;
    let column = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Diagnostic { line, column, message }
}

impl ProblemFile {
    pub fn parse(source: &str) -> Result<ProblemFile, Diagnostic> {
        toml::from_str(source).map_err(|e| {
            let message = e.message().to_string();
            locate(source, e.span(), message)
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem files always serialize")
    }

    /// Builds and validates the problem; `source` locates errors.
    pub fn to_problem(&self, source: &str) -> Result<Problem, Diagnostic> {
        let at = |span: Range<usize>, msg: String| locate(source, Some(span), msg);
        let labels: Vec<String> = self.states.labels.iter().map(|l| l.get_ref().clone()).collect();
        let prior: Vec<f64> = self.states.prior.get_ref().iter().map(|n| n.to_f64()).collect();
        let space = StateSpace::new(labels.clone(), prior).map_err(|e| at(self.states.prior.span(), e.to_string()))?;
        let n_states = labels.len();
        let index = |l: &Spanned<String>| {
            space
                .index_of(l.get_ref())
                .ok_or_else(|| at(l.span(), format!("unknown state '{}'", l.get_ref())))
        };
        let per_state = |v: &Spanned<PerState<Vec<Number>>>, what: &str| -> Result<Vec<Vec<f64>>, Diagnostic> {
            expand(v.get_ref(), &labels).map_err(|m| at(v.span(), format!("{what}: {m}")))
                .map(|rows| rows.into_iter().map(|r| r.iter().map(|n| n.to_f64()).collect()).collect())
        };

        let mut partitions = Vec::with_capacity(self.players.len());
        let mut utilities = Vec::with_capacity(self.players.len());
        for (i, p) in self.players.iter().enumerate() {
            let who = p.name.clone().unwrap_or_else(|| (i + 1).to_string());
            let blocks = p
                .partition
                .get_ref()
                .iter()
                .map(|b| b.iter().map(index).collect::<Result<Vec<usize>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            partitions.push(
                Partition::new(n_states, blocks)
                    .map_err(|e| at(p.partition.span(), format!("player {who}: {e}")))?,
            );
            let pieces = expand(p.utility.get_ref(), &labels)
                .map_err(|m| at(p.utility.span(), format!("player {who} utility: {m}")))?;
            let dim = pieces
                .iter()
                .flatten()
                .map(|pc| pc.coef.len())
                .next()
                .ok_or_else(|| at(p.utility.span(), format!("player {who} utility has no pieces")))?;
            let per_state = pieces
                .iter()
                .map(|ps| {
                    ps.iter()
                        .map(|pc| AffinePiece::new(pc.coef.iter().map(|n| n.to_f64()).collect(), pc.intercept.to_f64()))
                        .collect()
                })
                .collect();
            utilities.push(
                UtilitySpec::new(dim, per_state).map_err(|e| at(p.utility.span(), format!("player {who} utility: {e}")))?,
            );
        }
        let info = InformationStructure::new(partitions).map_err(|e| locate(source, None, e.to_string()))?;
        let delivery = match self.delivery {
            DeliveryStage::ExPost => Delivery::ExPost,
            DeliveryStage::Interim => Delivery::Interim,
        };
        let top = |msg: String| locate(source, None, msg);
        let problem = match self.kind {
            Kind::Economy => {
                let goods = self.goods.ok_or_else(|| top("economies need `goods`".into()))?;
                let mut endowments = Vec::with_capacity(self.players.len());
                for (i, p) in self.players.iter().enumerate() {
                    if let Some(a) = &p.actions {
                        return Err(at(a.span(), "economies take endowments, not actions".into()));
                    }
                    let e = p
                        .endowment
                        .as_ref()
                        .ok_or_else(|| top(format!("player {} has no endowment", i + 1)))?;
                    endowments.push(per_state(e, "endowment")?);
                }
                Problem::Economy(
                    Economy::new(space, info, goods, endowments, utilities, delivery).map_err(|e| top(e.to_string()))?,
                )
            }
            Kind::Game => {
                if self.goods.is_some() {
                    return Err(top("games take actions, not `goods`".into()));
                }
                let mut actions = Vec::with_capacity(self.players.len());
                for (i, p) in self.players.iter().enumerate() {
                    if let Some(e) = &p.endowment {
                        return Err(at(e.span(), "games take actions, not endowments".into()));
                    }
                    let a = p
                        .actions
                        .as_ref()
                        .ok_or_else(|| top(format!("player {} has no actions", i + 1)))?;
                    let vertices = a.get_ref().iter().map(|v| v.iter().map(|n| n.to_f64()).collect()).collect();
                    actions.push(ActionSet::new(vertices).map_err(|e| at(a.span(), e.to_string()))?);
                }
                Problem::Game(
                    NormalFormGame::new(space, info, actions, utilities, delivery).map_err(|e| top(e.to_string()))?,
                )
            }
        };
        let report = problem.validate();
        if let Some(v) = report.violations.first() {
            return Err(top(v.clone()));
        }
        Ok(problem)
    }
}

impl ProblemFile {
    /// The file form of an in-memory problem. Values are read through
    /// their shortest decimal form, so dyadic and short decimals are exact.
    pub fn from_problem(problem: &Problem) -> Result<ProblemFile, NumberError> {
        let space = problem.space();
        let labels = space.labels();
        let num = |v: f64| Number::from_f64(v);
        let nums = |vs: &[f64]| vs.iter().map(|&v| num(v)).collect::<Result<Vec<_>, _>>();
        let compress = |per_state: Vec<Vec<f64>>| -> Result<PerState<Vec<Number>>, NumberError> {
            if per_state.windows(2).all(|w| w[0] == w[1]) {
                Ok(PerState::All(nums(&per_state[0])?))
            } else {
                let map = labels.iter().cloned().zip(per_state.iter().map(|b| nums(b))).map(|(l, b)| b.map(|b| (l, b)));
                Ok(PerState::ByState(map.collect::<Result<_, _>>()?))
            }
        };
        let mut players = Vec::with_capacity(problem.n_players());
        for i in 0..problem.n_players() {
            let partition = problem
                .info()
                .partition(i)
                .blocks()
                .iter()
                .map(|b| b.iter().map(|&w| Spanned::new(0..0, labels[w].clone())).collect())
                .collect();
            let u = problem.utility(i);
            let pieces: Vec<Vec<Piece>> = u
                .per_state()
                .iter()
                .map(|ps| {
                    ps.iter()
                        .map(|pc| {
                            Ok(Piece {
                                coef: nums(&pc.coef)?,
                                intercept: num(pc.intercept)?,
                            })
                        })
                        .collect::<Result<Vec<_>, NumberError>>()
                })
                .collect::<Result<_, _>>()?;
            let utility = if pieces.windows(2).all(|w| w[0] == w[1]) {
                PerState::All(pieces[0].clone())
            } else {
                PerState::ByState(labels.iter().cloned().zip(pieces).collect())
            };
            let (endowment, actions) = match problem {
                Problem::Economy(e) => {
                    let per_state = (0..space.len()).map(|w| e.endowment(i, w).to_vec()).collect();
                    (Some(Spanned::new(0..0, compress(per_state)?)), None)
                }
                Problem::Game(g) => {
                    let vs = g.action_set(i).vertices().iter().map(|v| nums(v)).collect::<Result<_, _>>()?;
                    (None, Some(Spanned::new(0..0, vs)))
                }
            };
            players.push(PlayerFile {
                name: Some((i + 1).to_string()),
                partition: Spanned::new(0..0, partition),
                endowment,
                actions,
                utility: Spanned::new(0..0, utility),
            });
        }
        Ok(ProblemFile {
            kind: if problem.is_economy() { Kind::Economy } else { Kind::Game },
            delivery: match problem.delivery() {
                Delivery::ExPost => DeliveryStage::ExPost,
                Delivery::Interim => DeliveryStage::Interim,
            },
            goods: problem.as_economy().map(|e| e.goods()),
            states: States {
                labels: labels.iter().map(|l| Spanned::new(0..0, l.clone())).collect(),
                prior: Spanned::new(0..0, nums(space.prior())?),
            },
            players,
        })
    }
}

fn expand<T: Clone>(v: &PerState<T>, labels: &[String]) -> Result<Vec<T>, String> {
    match v {
        PerState::All(x) => Ok(vec![x.clone(); labels.len()]),
        PerState::ByState(map) => {
            if let Some(k) = map.keys().find(|k| !labels.contains(k)) {
                return Err(format!("unknown state '{k}'"));
            }
            labels
                .iter()
                .map(|l| map.get(l).cloned().ok_or_else(|| format!("missing state '{l}'")))
                .collect()
        }
    }
}

/// Parses and validates a problem file in one step.
pub fn load_problem(source: &str) -> Result<(ProblemFile, Problem), Diagnostic> {
    let file = ProblemFile::parse(source)?;
    let problem = file.to_problem(source)?;
    Ok((file, problem))
}

/// The three-player, two-state exchange economy with interim delivery.
pub const TWO_STATE_EXCHANGE: &str = include_str!("../examples/two_state_exchange.toml");
