//! Offspring and jump laws.

mod jump;
mod lattice_group;
mod offspring;

pub use jump::{canonical, make_jump_srw, orbit_size, AxisStructure, GreenAsymptotic, JumpDistribution};
pub use lattice_group::{lattice_certificate, LatticeCertificate};
pub use offspring::{make_geometric_critical, make_offspring, OffspringDistribution, OffspringKind};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("offspring mean is {mean}, expected 1")]
    NotCritical { mean: f64 },
    #[error("offspring law is degenerate (pmf(1) = 1)")]
    Degenerate,
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("support generates a proper sublattice of index {index}: {certificate:?}")]
    NotAdapted { index: u64, certificate: LatticeCertificate },
    #[error("invalid entry: {0}")]
    InvalidEntry(String),
}
