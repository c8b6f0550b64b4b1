//! Finite plane trees, Galton–Watson sampling and spatial trees.

mod plane_tree;
mod sampling;
mod spatial;

pub use plane_tree::{lukasiewicz, tree_from_lukasiewicz, PlaneTree};
pub use sampling::{cycle_rotate, sample_gw, sample_gw_conditioned_size, sample_uniform_plane_tree, DEFAULT_SIZE_CAP};
pub use spatial::{assign_locations, range_of, SpatialTree};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GwError {
    #[error("invalid Lukasiewicz path: {0}")]
    InvalidPath(String),
    #[error("tree exceeded the size cap of {cap} vertices")]
    CapExceeded { cap: u64 },
    #[error("no tree with {n} vertices has positive probability")]
    InfeasibleSize { n: u64 },
}
