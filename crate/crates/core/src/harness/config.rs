//! Experiment configuration: JSON files with strict key checking, merged with inline flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::distributions::{make_geometric_critical, make_jump_srw, JumpDistribution, OffspringDistribution};
use crate::lattice::{Point, MAX_DIM};

pub const SEED_ENV: &str = "TREERANGE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    InfiniteRange,
    NoReturn,
    ConstantFormula,
    ConditionedRange,
    SnakeFree,
    SnakeExcursion,
    HeadReturnExact,
    NoReturnHead,
    Green,
    GreenSum,
    Suffcond,
    Bessel,
    Brw,
    Verify,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 14] = [
        Self::InfiniteRange,
        Self::NoReturn,
        Self::ConstantFormula,
        Self::ConditionedRange,
        Self::SnakeFree,
        Self::SnakeExcursion,
        Self::HeadReturnExact,
        Self::NoReturnHead,
        Self::Green,
        Self::GreenSum,
        Self::Suffcond,
        Self::Bessel,
        Self::Brw,
        Self::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::InfiniteRange => "infinite-range",
            Self::NoReturn => "no-return",
            Self::ConstantFormula => "constant-formula",
            Self::ConditionedRange => "conditioned-range",
            Self::SnakeFree => "snake-free",
            Self::SnakeExcursion => "snake-excursion",
            Self::HeadReturnExact => "head-return-exact",
            Self::NoReturnHead => "no-return-head",
            Self::Green => "green",
            Self::GreenSum => "green-sum",
            Self::Suffcond => "suffcond",
            Self::Bessel => "bessel",
            Self::Brw => "brw",
            Self::Verify => "verify",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Dimension used when neither the config nor a jump table fixes one.
    pub fn default_dim(self) -> usize {
        match self {
            Self::SnakeFree | Self::SnakeExcursion | Self::HeadReturnExact | Self::NoReturnHead | Self::Green | Self::GreenSum => 4,
            Self::Bessel => 4,
            _ => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    #[default]
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffspringKindConfig {
    Geometric,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffspringConfig {
    pub kind: OffspringKindConfig,
    #[serde(default)]
    pub pmf: Option<Vec<(u32, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpKindConfig {
    Srw,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub kind: JumpKindConfig,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub support: Option<Vec<(Vec<i32>, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionsConfig {
    #[serde(default)]
    pub offspring: Option<OffspringConfig>,
    #[serde(default)]
    pub jump: Option<JumpConfig>,
}

/// Every field is optional so that files and inline flags can be layered.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub distributions: Option<DistributionsConfig>,
    pub dim: Option<usize>,
    pub n: Option<u64>,
    pub p: Option<u64>,
    pub reps: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub horizon: Option<u64>,
    pub j_max: Option<u64>,
    pub checkpoints: Option<Vec<u64>>,
    pub ks: Option<Vec<u64>>,
    /// h-table box radius (constant-formula).
    pub radius: Option<i32>,
    /// Green table box radius (green dump, green-sum, suffcond, constant-formula fallback).
    pub green_radius: Option<i32>,
    pub h_trees: Option<u64>,
    pub size_cap: Option<u64>,
    pub progeny_cap: Option<u64>,
    pub step_cap: Option<u64>,
    pub initial_positions: Option<Vec<Vec<i32>>>,
    pub x: Option<Vec<i32>>,
    pub eps: Option<f64>,
    pub dump: Option<PathBuf>,
    pub m: Option<u64>,
    pub alpha: Option<f64>,
    pub r: Option<f64>,
    pub t: Option<f64>,
    pub dt: Option<f64>,
    pub level: Option<VerifyLevel>,
    /// Verify only: damage one Green table entry so the harmonicity check must fail.
    pub corrupt_green: Option<bool>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fields set in `other` replace ours.
    pub fn overlay(mut self, other: ExperimentConfig) -> Self {
        overlay!(self, other; experiment, distributions, dim, n, p, reps, seed, workers, out, horizon, j_max,
            checkpoints, ks, radius, green_radius, h_trees, size_cap, progeny_cap, step_cap, initial_positions,
            x, eps, dump, m, alpha, r, t, dt, level, corrupt_green);
        self
    }

    /// Applies `TREERANGE_SEED` if set; it takes precedence over every other seed source.
    pub fn apply_env(mut self) -> Result<Self, HarnessError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            let seed = v.trim().parse().map_err(|_| HarnessError::Config(format!("{SEED_ENV}={v:?} is not a 64-bit unsigned integer")))?;
            self.seed = Some(seed);
        }
        Ok(self)
    }

    pub fn kind(&self) -> Result<ExperimentKind, HarnessError> {
        self.experiment.ok_or_else(|| HarnessError::Config("no experiment given".into()))
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    /// The reproduction law, critical geometric unless a table is configured.
    pub fn offspring(&self) -> Result<OffspringDistribution, HarnessError> {
        let Some(cfg) = self.distributions.as_ref().and_then(|d| d.offspring.as_ref()) else {
            return Ok(make_geometric_critical());
        };
        match (cfg.kind, &cfg.pmf) {
            (OffspringKindConfig::Geometric, None) => Ok(make_geometric_critical()),
            (OffspringKindConfig::Geometric, Some(_)) => Err(HarnessError::Config("geometric offspring takes no pmf".into())),
            (OffspringKindConfig::Table, None) => Err(HarnessError::Config("table offspring needs a pmf".into())),
            (OffspringKindConfig::Table, Some(pmf)) => Ok(OffspringDistribution::from_entries("table", pmf)?),
        }
    }

    /// The jump law and its dimension, reconciled with `dim`.
    pub fn jump(&self, kind: ExperimentKind) -> Result<JumpDistribution, HarnessError> {
        let cfg = self.distributions.as_ref().and_then(|d| d.jump.as_ref());
        let table_dim = cfg.and_then(|j| j.dim);
        let dim = match (self.dim, table_dim) {
            (Some(a), Some(b)) if a != b => {
                return Err(HarnessError::Validation(format!("dim = {a} disagrees with the jump table dimension {b}")));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => kind.default_dim(),
        };
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(HarnessError::Validation(format!("dim = {dim} outside 1..={MAX_DIM}")));
        }
        let Some(cfg) = cfg else {
            return Ok(make_jump_srw(dim));
        };
        match (cfg.kind, &cfg.support) {
            (JumpKindConfig::Srw, None) => Ok(make_jump_srw(dim)),
            (JumpKindConfig::Srw, Some(_)) => Err(HarnessError::Config("srw jump takes no support".into())),
            (JumpKindConfig::Table, None) => Err(HarnessError::Config("table jump needs a support".into())),
            (JumpKindConfig::Table, Some(support)) => {
                let pts = support
                    .iter()
                    .map(|(x, p)| {
                        if x.len() != dim {
                            return Err(HarnessError::Config(format!("support point {x:?} does not have {dim} coordinates")));
                        }
                        Ok((Point::from_slice(x), *p))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(JumpDistribution::from_table(dim, pts)?)
            }
        }
    }
}
