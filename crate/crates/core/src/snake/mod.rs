//! The discrete snake driven by a jump law θ.

mod estimators;
mod excursion;
mod pitman;
mod state;

pub use estimators::{
    estimate_no_return_head, free_range, free_range_trace, green_identity_check, no_return_head_stopped, symmetry_check,
    GreenIdentityReport, SymmetryReport,
};
pub use excursion::{excursion_range, excursion_range_estimate, sample_excursion, ExcursionSample};
pub use pitman::{
    head_return_exact, head_return_exact_rational, head_return_table, pitman_pmf, pitman_pmf_f64, return_probabilities_exact,
};
pub use state::{SnakeMove, SnakeState};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SnakeError {
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("only {hits} replicas hit the conditioning event, need at least {needed}")]
    TooFewHits { hits: u64, needed: u64 },
    #[error(transparent)]
    Analytics(#[from] crate::analytics::AnalyticsError),
}
