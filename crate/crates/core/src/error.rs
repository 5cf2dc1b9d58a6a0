use thiserror::Error;

use crate::riemann::State;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("root finder did not converge after {iterations} iterations ({context})")]
    NoConvergence {
        iterations: usize,
        context: &'static str,
    },

    #[error(
        "Riemann problem between {left:?} and {right:?} has no admissible intersection: {reason}"
    )]
    NoIntersection {
        left: State,
        right: State,
        reason: &'static str,
    },

    #[error("degenerate jump: {0}")]
    Degenerate(String),

    #[error("Riemann solve failed at x = {position}: {source}")]
    AtJump {
        position: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("interaction at t = {time}, x = {position} failed: {source}")]
    Interaction {
        time: f64,
        position: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("time {time} outside the computed window [0, {t_final}]")]
    OutOfRange { time: f64, t_final: f64 },

    #[error("ordering violated: {0}")]
    Ordering(String),

    #[error("perturbation budget exceeded: {term} = {value:.6e} (budget {limit:.6e})")]
    BudgetExceeded {
        term: String,
        value: f64,
        limit: f64,
    },

    #[error("not enough data: {0}")]
    InsufficientData(String),
}
