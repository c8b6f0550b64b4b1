//! Exact and numerical lattice computations.

mod axis;
#[cfg(feature = "bessel")]
mod bessel_process;
mod bessel_fn;
mod convolution;
mod green;
mod green_sum;
mod kemperman;
mod quadrature;
mod suffcond;

pub use axis::axis_return_probabilities;
#[cfg(feature = "bessel")]
pub use bessel_process::{bessel_log_integral, bessel_marginal, bessel_scaling_test};
pub use bessel_fn::scaled_bessel_i;
pub use convolution::{return_probabilities_dp, step_pmf_power, LatticeFunction, DEFAULT_BOX_BUDGET};
pub use green::{green, green_convolution, remark_phi, GreenMethod, GreenTable, GreenValue, Symmetry};
pub use green_sum::green_sum_along_walk;
pub use quadrature::{composite, gauss_legendre};
pub use kemperman::{kemperman_check, kemperman_grid, llt_compare, srw_point_prob, srw_point_prob_f64};
pub use suffcond::{suffcond_diagnostic, suffcond_factor};

use thiserror::Error;

use crate::distributions::JumpDistribution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("box of {points} points exceeds the budget of {budget}")]
    BoxBudgetExceeded { points: u64, budget: u64 },
    #[error("walk in dimension {dim} is recurrent")]
    NonTransient { dim: usize },
    #[error("parity: {0}")]
    ParityError(String),
    #[error("argument out of domain: {0}")]
    DomainError(String),
}

/// p_k(0) for k = 0..=kmax: exact per-axis formula when θ moves along one axis per
/// step, box convolution otherwise.
pub fn return_probabilities(theta: &JumpDistribution, kmax: usize) -> Result<Vec<f64>, AnalyticsError> {
    match theta.axis_structure() {
        Some(axis) => Ok(axis_return_probabilities(&axis, kmax)),
        None => return_probabilities_dp(theta, kmax as u32, DEFAULT_BOX_BUDGET),
    }
}
