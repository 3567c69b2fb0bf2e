use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("graph contains a cycle: {0:?}")]
    CyclicInput(Vec<String>),
    #[error("bit vertex {0} cannot be deleted")]
    BitDeletion(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("function is not 0/1 valued")]
    NonBooleanFunction,
    #[error("enumeration of {needed} objects exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("inconsistent witness: {0}")]
    InconsistentWitness(String),
    #[error("surviving test vertices do not form an acyclic graph: {0:?}")]
    CyclicSurvivor(Vec<String>),
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("labeling is not total: missing {0}")]
    PartialLabeling(String),
    #[error("no regular bipartite graph with |V|={nv}, |W|={nw}, deg={deg}")]
    InfeasibleDegrees { nv: usize, nw: usize, deg: usize },
    #[error("invalid parameter: {0}")]
    ParamError(String),
    #[error("vertex ids are not topologically ordered: arc ({0}, {1})")]
    NotTopologicallyOrdered(usize, usize),
    #[error("gamma must lie strictly between 0 and {0}")]
    BadGamma(String),
    #[error("instance was not produced from this graph: {0}")]
    ForeignInstance(String),
    #[error("no realization meets the deadline")]
    Infeasible,
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn budget(needed: u128, budget: u64) -> Self {
        Error::BudgetExceeded { needed, budget }
    }

    pub(crate) fn check_budget(needed: u128, budget: u64) -> Result<()> {
        if needed > budget as u128 {
            Err(Self::budget(needed, budget))
        } else {
            Ok(())
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
