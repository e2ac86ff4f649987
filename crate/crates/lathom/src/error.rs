//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LathomError {
    #[error("lattice spacing must be positive, got {0}")]
    InvalidSpacing(f64),

    #[error("domain box is empty or inverted on axis {axis}: [{lo}, {hi})")]
    EmptyBox { axis: usize, lo: f64, hi: f64 },

    #[error("domain would hold {requested} sites, exceeding the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: usize },

    #[error("{quantity} = {value} is not an integer multiple of {unit} = {unit_value}")]
    NotCommensurate {
        quantity: &'static str,
        value: f64,
        unit: &'static str,
        unit_value: f64,
    },

    #[error("functions live on different lattice domains")]
    DomainMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometry is infeasible: {0}")]
    Infeasible(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LathomError>;
