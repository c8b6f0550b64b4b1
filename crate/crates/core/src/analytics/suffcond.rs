//! Positivity criterion for the range constant: log-partial products of
//! (1 − g((1 − G(S_j))₊)) / G(S_j) along a walk.

use serde_json::json;

use super::green::GreenTable;
use crate::distributions::{JumpDistribution, OffspringDistribution};
use crate::lattice::Point;
use crate::replicate::Replication;
use crate::stats::{median, quantile, EstimateRecord};

/// One factor of the product, in (0, 1].
pub fn suffcond_factor(mu: &OffspringDistribution, g: f64) -> f64 {
    if g < 1.0 {
        // (1 − g_μ(1 − G))/G is the tail series at 1 − G
        mu.tail_series(1.0 - g)
    } else {
        (1.0 - mu.pmf(0)) / g
    }
}

/// Per-replica log-partial products recorded at `checkpoints` (ascending, ≤ j_max).
/// The value is the median over replicas of the change between the last two checkpoints.
/// With `alpha`, partial sums of G(S_j)^{α−1} are also recorded.
pub fn suffcond_diagnostic(
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    table: &GreenTable,
    checkpoints: &[u64],
    alpha: Option<f64>,
    rep: &Replication,
) -> EstimateRecord {
    assert!(checkpoints.len() >= 2 && checkpoints.windows(2).all(|w| w[0] < w[1]), "need two ascending checkpoints");
    let jmax = *checkpoints.last().unwrap();
    let runs: Vec<(Vec<f64>, Vec<f64>)> = rep.run(|_, rng| {
        let mut s = Point::ORIGIN;
        let mut logp = 0.0;
        let mut stable = 0.0;
        let mut at = Vec::with_capacity(checkpoints.len());
        let mut stable_at = Vec::with_capacity(checkpoints.len());
        let mut next = 0;
        for j in 1..=jmax {
            s += theta.sample(rng);
            let g = table.eval(&s);
            logp += suffcond_factor(mu, g).ln();
            if let Some(a) = alpha {
                stable += g.powf(a - 1.0);
            }
            if j == checkpoints[next] {
                at.push(logp);
                stable_at.push(stable);
                next += 1;
            }
        }
        (at, stable_at)
    });
    let k = checkpoints.len();
    let drift: Vec<f64> = runs.iter().map(|r| r.0[k - 1] - r.0[k - 2]).collect();
    let med_drift = median(&drift);
    let medians: Vec<f64> = (0..k).map(|c| median(&runs.iter().map(|r| r.0[c]).collect::<Vec<_>>())).collect();
    let mut sorted = drift.clone();
    sorted.sort_by(f64::total_cmp);
    let mut rec = EstimateRecord::from_samples(&drift, rep.seed, json!({"checkpoints": checkpoints, "dim": theta.dim}));
    rec.value = med_drift;
    rec = rec
        .with_extra("mean_drift", drift.iter().sum::<f64>() / drift.len() as f64)
        .with_extra("drift_q10", quantile(&sorted, 0.1))
        .with_extra("drift_q90", quantile(&sorted, 0.9))
        .with_extra("median_log_product", medians)
        .with_extra("stabilized", med_drift.abs() < 0.05);
    if alpha.is_some() {
        let st: Vec<f64> = (0..k).map(|c| median(&runs.iter().map(|r| r.1[c]).collect::<Vec<_>>())).collect();
        rec = rec.with_extra("median_stable_sum", st);
    }
    rec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::make_geometric_critical;

    #[test]
    fn factors_in_unit_interval() {
        let mu = make_geometric_critical();
        for i in 1..=40 {
            let g = i as f64 / 20.0;
            let f = suffcond_factor(&mu, g);
            assert!(f > 0.0 && f <= 1.0, "{g} {f}");
        }
        // s = 1 − G, geometric: (1 − 1/(2 − s))/(1 − s) = 1/(2 − s)
        assert!((suffcond_factor(&mu, 0.25) - 1.0 / 1.25).abs() < 1e-15);
    }
}
