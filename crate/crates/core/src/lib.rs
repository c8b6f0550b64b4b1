//! Range of random walks indexed by critical Galton–Watson trees on ℤ^d.

#![allow(clippy::needless_range_loop)]

pub mod analytics;
pub mod brw;
pub mod distributions;
pub mod gw_trees;
pub mod harness;
pub mod lattice;
pub mod replicate;
pub mod rng;
pub mod snake;
pub mod spine;
pub mod stats;

pub use distributions::{make_geometric_critical, make_jump_srw, make_offspring, DistError, JumpDistribution, OffspringDistribution};
pub use lattice::{Point, SiteSet, MAX_DIM};
