use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state space: {0}")]
    StateSpace(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("operands live on different state spaces ({left} vs {right} states)")]
    SpaceMismatch { left: usize, right: usize },

    #[error("coalition is empty")]
    EmptyCoalition,

    #[error("player {0} out of range")]
    UnknownPlayer(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("not measurable: {0}")]
    NotMeasurable(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("event is not common knowledge for the coalition")]
    NotCommonKnowledge,

    #[error("invalid information field: {0}")]
    InvalidField(String),

    #[error("{what}: estimated {estimate} items exceeds the budget of {budget}")]
    BudgetExceeded {
        what: &'static str,
        estimate: u128,
        budget: usize,
    },

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("aux profile escapes its block: {0}")]
    Support(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error("witness does not achieve the payoff vector: {0}")]
    Witness(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("pivot budget of {budget} exhausted; last primitive set {last_basis:?}")]
    PivotBudget { budget: usize, last_basis: Vec<usize> },

    #[error("pivoting terminated on a balanced set whose payoff is not achievable by the grand coalition (basis {basis:?})")]
    NotAchievable { basis: Vec<usize> },

    #[error("scarf pivoting: {0}")]
    Pivoting(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }
}
