//! Green function summed along a random-walk trajectory.

use serde_json::json;

use super::green::GreenTable;
use crate::distributions::JumpDistribution;
use crate::lattice::Point;
use crate::replicate::Replication;
use crate::stats::EstimateRecord;

/// Σ_{k=0}^m G(S_k) / log m over replicas.
///
/// `extra` reports the second moment, the limiting constant 1/(4π²σ⁴) and, for
/// α ∈ {0.1, 0.2}, the fraction of replicas with |Σ G(S_k) − log m/(4π²σ⁴)| ≥ α log m.
pub fn green_sum_along_walk(theta: &JumpDistribution, table: &GreenTable, m: u64, rep: &Replication) -> EstimateRecord {
    assert!(m >= 2, "m must be at least 2");
    let lm = (m as f64).ln();
    let sums: Vec<f64> = rep.run(|_, rng| {
        let mut s = Point::ORIGIN;
        let mut acc = table.eval(&s);
        for _ in 0..m {
            s += theta.sample(rng);
            acc += table.eval(&s);
        }
        acc
    });
    let scaled: Vec<f64> = sums.iter().map(|s| s / lm).collect();
    let limit = 1.0 / (4.0 * std::f64::consts::PI.powi(2) * theta.sigma2 * theta.sigma2);
    let dev = |alpha: f64| sums.iter().filter(|&&s| (s - limit * lm).abs() >= alpha * lm).count() as f64 / sums.len() as f64;
    let second = scaled.iter().map(|x| x * x).sum::<f64>() / scaled.len() as f64;
    EstimateRecord::from_samples(&scaled, rep.seed, json!({"m": m, "dim": theta.dim}))
        .with_extra("limit", limit)
        .with_extra("second_moment", second)
        .with_extra("min_sum", sums.iter().copied().fold(f64::INFINITY, f64::min))
        .with_extra("deviation_fraction_0.1", dev(0.1))
        .with_extra("deviation_fraction_0.2", dev(0.2))
}
