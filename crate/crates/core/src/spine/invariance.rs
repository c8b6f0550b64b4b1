//! Finite statistics of the infinite tree under repeated shifts.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::prefix::SpinePrefix;
use super::SpineError;
use crate::distributions::{JumpDistribution, OffspringDistribution};
use crate::lattice::Point;
use crate::replicate::Replication;
use crate::stats::{chi_square_gof, chi_square_two_sample, TestOutcome};

/// Cap on the size of 𝒯₀ in the shift statistics.
pub const SIZE_CAP: usize = 10;

/// (k_∅(𝒯₀), k_∅(𝒯₋₁), #𝒯₀ ∧ 10) together with u₁ relative to the root and to its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShiftStatistics {
    pub k0: usize,
    pub k1: usize,
    pub size0: usize,
    pub u1_root: Point,
    pub u1_parent: Point,
}

/// Samples the infinite tree, applies τ* `shifts` times and reads the statistics.
pub fn shift_statistics<R: Rng + ?Sized>(mu: &OffspringDistribution, theta: &JumpDistribution, shifts: usize, rng: &mut R) -> ShiftStatistics {
    let mut t = SpinePrefix::sample(4, mu, theta, rng);
    for _ in 0..shifts {
        t = loop {
            match t.shift_tau(mu, theta, rng) {
                Ok(next) => break next,
                Err(SpineError::InsufficientPrefix) => t.extend(4, theta, mu, rng),
                Err(e) => unreachable!("{e}"),
            }
        };
    }
    if t.len() < 2 {
        t.extend(1, theta, mu, rng);
    }
    let k0 = t.root_degree(0, mu, theta, rng);
    let k1 = t.root_degree(1, mu, theta, rng);
    let (u1_root, u1_parent) = loop {
        match t.first_vertex(mu, theta, rng) {
            Some(v) => break v,
            None => t.extend(4, theta, mu, rng),
        }
    };
    let size0 = t.subtrees[0].size_capped(SIZE_CAP, mu, theta, rng);
    ShiftStatistics { k0, k1, size0, u1_root, u1_parent }
}

fn cell(s: &ShiftStatistics) -> usize {
    (s.k0.min(3) * 4 + s.k1.min(3)) * (SIZE_CAP + 1) + s.size0
}

/// Tests on `rep.reps` samples after each of `shifts`, against the unshifted sample.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftInvarianceReport {
    pub shifts: usize,
    pub samples: u64,
    /// (k₀, k₁) on {0,1,2}² against μ(n₀)·μ([n₁+1, ∞)).
    pub joint_gof: TestOutcome,
    /// Two-sample test of (k₀ ∧ 3, k₁ ∧ 3, #𝒯₀ ∧ 10) against the unshifted law.
    pub homogeneity: TestOutcome,
    /// u₁ − parent(u₁) against θ.
    pub step_gof: TestOutcome,
    /// Two-sample test of u₁ relative to the root against the unshifted law.
    pub u1_homogeneity: TestOutcome,
}

impl ShiftInvarianceReport {
    pub fn passes(&self, level: f64) -> bool {
        [&self.joint_gof, &self.homogeneity, &self.step_gof, &self.u1_homogeneity].iter().all(|t| t.passes(level))
    }
}

pub fn shift_invariance(
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    shifts: &[usize],
    rep: &Replication,
) -> Vec<ShiftInvarianceReport> {
    let base = rep.derive(rep.reps, 0).run(|_, rng| shift_statistics(mu, theta, 0, rng));
    let cells = 16 * (SIZE_CAP + 1);
    let count = |xs: &[ShiftStatistics]| {
        let mut c = vec![0u64; cells];
        xs.iter().for_each(|s| c[cell(s)] += 1);
        c
    };
    let base_cells = count(&base);
    // cells from the union of both samples, so neither sample defines the partition
    let site_test = |a: &[ShiftStatistics], b: &[ShiftStatistics]| {
        let mut cells: BTreeMap<Point, [u64; 2]> = BTreeMap::new();
        a.iter().for_each(|s| cells.entry(s.u1_root).or_default()[0] += 1);
        b.iter().for_each(|s| cells.entry(s.u1_root).or_default()[1] += 1);
        let (x, y): (Vec<u64>, Vec<u64>) = cells.values().map(|c| (c[0], c[1])).unzip();
        chi_square_two_sample(&x, &y)
    };
    let mut probs = Vec::with_capacity(9);
    for n0 in 0..3u32 {
        for n1 in 0..3u32 {
            probs.push(mu.pmf(n0) * mu.tail(n1));
        }
    }
    let steps: Vec<Point> = theta.support.iter().map(|s| s.0).collect();
    let step_probs: Vec<f64> = theta.support.iter().map(|s| s.1).collect();
    shifts
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let xs = rep.derive(rep.reps, 1 + i as u64).run(|_, rng| shift_statistics(mu, theta, k, rng));
            let mut joint = vec![0u64; 9];
            let mut step = vec![0u64; steps.len()];
            for s in &xs {
                if s.k0 < 3 && s.k1 < 3 {
                    joint[s.k0 * 3 + s.k1] += 1;
                }
                step[steps.iter().position(|&y| y == s.u1_parent).expect("step in support")] += 1;
            }
            ShiftInvarianceReport {
                shifts: k,
                samples: rep.reps,
                joint_gof: chi_square_gof(&joint, &probs, rep.reps),
                homogeneity: chi_square_two_sample(&base_cells, &count(&xs)),
                step_gof: chi_square_gof(&step, &step_probs, rep.reps),
                u1_homogeneity: site_test(&base, &xs),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_geometric_critical, make_jump_srw};

    #[test]
    fn shifted_statistics_keep_the_law() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(3);
        let reports = shift_invariance(&mu, &theta, &[1, 3], &Replication::new(20_000, 11));
        for r in &reports {
            assert!(r.passes(1e-3), "{r:?}");
        }
    }

    #[test]
    fn unshifted_root_degree_is_mu() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(3);
        let xs = Replication::new(20_000, 3).run(|_, rng| shift_statistics(&mu, &theta, 0, rng));
        let mut c = vec![0u64; 4];
        xs.iter().filter(|s| s.k0 < 4).for_each(|s| c[s.k0] += 1);
        let probs: Vec<f64> = (0..4).map(|k| mu.pmf(k)).collect();
        assert!(chi_square_gof(&c, &probs, 20_000).passes(1e-3));
        assert!(xs.iter().all(|s| (1..=SIZE_CAP).contains(&s.size0)));
    }
}
