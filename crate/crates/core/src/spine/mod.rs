//! The invariant infinite tree, its shift, and the estimators of c_{μ,θ}.

mod estimators;
mod htable;
mod invariance;
mod prefix;
mod walk;

pub use estimators::{
    conditioned_range, estimate_a, estimate_c_formula, estimate_h, estimate_no_return, infinite_range, range_process,
    RangeTrace,
};
pub use htable::{HFallback, HTable, HValues};
pub use invariance::{shift_invariance, shift_statistics, ShiftInvarianceReport, ShiftStatistics, SIZE_CAP};
pub use prefix::{Node, SpinePrefix};
pub use walk::SpineWalk;

use thiserror::Error;

use crate::gw_trees::GwError;
use crate::lattice::Point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpineError {
    #[error("the encoded prefix has no vertex off the spine")]
    InsufficientPrefix,
    #[error("no h value at {0:?}")]
    HTableMiss(Point),
    #[error(transparent)]
    Gw(#[from] GwError),
}
