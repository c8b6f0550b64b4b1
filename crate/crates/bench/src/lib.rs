//! Shared fixtures for the benchmarks.

use treerange_core::rng::{stream, Stream};
use treerange_core::{make_geometric_critical, make_jump_srw, JumpDistribution, OffspringDistribution};

pub const SEED: u64 = 7;

/// Critical geometric offspring law and the simple random walk in `dim` dimensions.
pub fn laws(dim: usize) -> (OffspringDistribution, JumpDistribution) {
    (make_geometric_critical(), make_jump_srw(dim))
}

pub fn rng() -> Stream {
    stream(SEED, 0)
}
