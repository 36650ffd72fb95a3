use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("plan input rejected: {0}")]
    PlanInput(String),
    #[error("plan infeasible: predicate `{predicate}` still fails after {iterations} iterations")]
    PlanInfeasible { predicate: String, iterations: usize },
    #[error("spectrum does not satisfy the plan: {0}")]
    Mismatch(String),
    #[error("sampling round drew no samples")]
    EmptyRound,
    #[error("basket is empty")]
    EmptyBasket,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
