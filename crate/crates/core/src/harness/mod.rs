//! Configuration, dispatch, CSV output and the verification suite behind the CLI.

mod config;
mod output;
mod run;
mod verify;

pub use config::{
    DistributionsConfig, ExperimentConfig, ExperimentKind, JumpConfig, JumpKindConfig, OffspringConfig, OffspringKindConfig,
    VerifyLevel, SEED_ENV,
};
pub use output::{write_rows, ResultRow, HEADER};
pub use run::{run, run_and_write, RunOutput};
pub use verify::{pitman_by_enumeration, verify, CheckResult, VerifyReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit status: 2 for bad input, 1 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Validation(_) => 2,
            HarnessError::Io(_) => 1,
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {
        $(impl From<$t> for HarnessError {
            fn from(e: $t) -> Self {
                HarnessError::Validation(e.to_string())
            }
        })*
    };
}

validation_from!(
    crate::distributions::DistError,
    crate::analytics::AnalyticsError,
    crate::snake::SnakeError,
    crate::spine::SpineError,
    crate::brw::BrwError,
    crate::gw_trees::GwError
);

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.into())
    }
}
