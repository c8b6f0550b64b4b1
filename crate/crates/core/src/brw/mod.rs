//! Branching random walk started from p particles.

mod laws;
mod measure;
mod run;

pub use laws::{j_cdf, progeny_ks, progeny_pmf, ratio_experiment, ratio_experiment_from, RatioSummary};
pub use measure::PointMeasure;
pub use run::{brw_run, brw_run_from, brw_step, BrwRunResult, DEFAULT_PROGENY_CAP};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BrwError {
    #[error("argument out of domain: {0}")]
    DomainError(String),
}
